"""Finite-stage convergence verdicts for double sequences.

Nothing here proves a limit.  Every functional is evaluated on a schedule
of growing truncations and a three-way verdict is returned: converges,
diverges, or inconclusive.  The residual engine is shared by all notions:

  * converges when the last residual is exactly small, or small with a
    decaying trend, or the trend has decayed geometrically across the last
    three stages (slow algebraic decay is accepted this way),
  * diverges when residuals sit above the decision tolerance and never
    decrease, or grow geometrically,
  * inconclusive otherwise.

Window functionals follow the almost-convergence recipe: at each stage two
canonical square extents are scanned over every admissible base position,
one odd and one even, so parity-sensitive oscillations cannot hide.

The notions: p (tail-rectangle limit), bp (p plus boundedness), r (p plus
row and column limits), almost (window means), strong almost (window means
of absolute deviations), and the almost-Cauchy discrepancy.  Null variants
pin the candidate limit at zero instead of estimating it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .seqcore import (
    DoubleSequence,
    Truncation,
    Window,
    padded_prefix,
    window_mean,
    window_sum_table,
)
from .matrix4d import BParams, b_transform

__all__ = [
    "CONVERGES",
    "DIVERGES",
    "INCONCLUSIVE",
    "ConvergenceMode",
    "ToleranceConfig",
    "TruncationSchedule",
    "Verdict",
    "canonical_extents",
    "stage_extent_pairs",
    "decide_residuals",
    "decide_sups",
    "p_limit",
    "bounded",
    "bp_limit",
    "r_limit",
    "almost_limit",
    "strong_almost_limit",
    "almost_cauchy",
    "membership",
    "SPACE_TAGS",
]

CONVERGES = "converges"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"

SPACE_TAGS = (
    "Mu", "Cp", "Cbp", "Cr",
    "Cf", "Cf0", "SCf", "SCf0",
    "BCf", "BCf0", "BSCf", "BSCf0",
)


@dataclass(frozen=True)
class ConvergenceMode:
    """Which summability notion indexes a limit: p, bp, or r."""

    tag: str

    def __post_init__(self):
        if self.tag not in ("p", "bp", "r"):
            raise ValueError(f"unknown convergence mode {self.tag!r}")


@dataclass(frozen=True)
class ToleranceConfig:
    decision_tol: float = 1e-3
    exact_tol: float = 1e-9
    trend_ratio: float = 0.8

    def __post_init__(self):
        if not (0 < self.exact_tol <= self.decision_tol < 1):
            raise ValueError("need 0 < exact_tol <= decision_tol < 1")
        if not (0 < self.trend_ratio < 1):
            raise ValueError("trend_ratio must lie in (0, 1)")


@dataclass(frozen=True)
class TruncationSchedule:
    """Strictly growing truncations, at least three so trends are decidable."""

    sizes: tuple

    def __post_init__(self):
        if len(self.sizes) < 3:
            raise ValueError("a schedule needs at least three stages")
        for a, b in zip(self.sizes, self.sizes[1:]):
            if not (b.M > a.M and b.N > a.N):
                raise ValueError("schedule truncations must grow strictly in both axes")

    @staticmethod
    def squares(sides) -> "TruncationSchedule":
        return TruncationSchedule(tuple(Truncation(s, s) for s in sides))

    @staticmethod
    def default() -> "TruncationSchedule":
        return TruncationSchedule.squares((8, 16, 32, 64, 128))

    @property
    def largest(self) -> Truncation:
        return self.sizes[-1]


@dataclass(frozen=True)
class Verdict:
    decision: str
    candidate_limit: Optional[float]
    residual_trace: tuple
    mode: str
    bound: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.decision == CONVERGES


def canonical_extents(side: int):
    """The stage's two square window extents, one odd and one even."""
    q_hi = max(1, side // 2 - 1)
    q_lo = max(0, q_hi - 1)
    return q_hi, q_lo


def stage_extent_pairs(side: int):
    q_hi, q_lo = canonical_extents(side)
    pairs = [(q_hi, q_hi)]
    if q_lo != q_hi:
        pairs.append((q_lo, q_lo))
    return pairs


def decide_residuals(values, tol: ToleranceConfig) -> str:
    """Three-way call on a residual trace; see the module docstring."""
    v = [float(x) for x in values]
    if len(v) < 3:
        raise ValueError("need at least three stages to decide")
    if v[-1] <= tol.exact_tol:
        return CONVERGES
    if v[-1] <= tol.decision_tol and v[-1] <= tol.trend_ratio * v[-2]:
        return CONVERGES
    if (
        v[-1] <= tol.trend_ratio * v[-2] + tol.exact_tol
        and v[-2] <= tol.trend_ratio * v[-3] + tol.exact_tol
    ):
        return CONVERGES
    nondecreasing = all(b >= a * (1 - 1e-9) - 1e-12 for a, b in zip(v, v[1:]))
    if nondecreasing and all(x >= tol.decision_tol for x in v):
        return DIVERGES
    if (
        v[-1] >= tol.decision_tol
        and v[-1] * tol.trend_ratio >= v[-2]
        and v[-2] * tol.trend_ratio >= v[-3]
    ):
        return DIVERGES
    return INCONCLUSIVE


def decide_sups(values, tol: ToleranceConfig) -> str:
    """Boundedness call on a trace of grid sups (monotone by construction)."""
    s = [float(x) for x in values]
    if len(s) < 3:
        raise ValueError("need at least three stages to decide")
    last_ok = abs(s[-1] - s[-2]) <= tol.decision_tol * max(1.0, abs(s[-1]))
    prev_ok = abs(s[-2] - s[-3]) <= tol.decision_tol * max(1.0, abs(s[-2]))
    if last_ok and prev_ok:
        return CONVERGES
    if (
        s[-3] > 0
        and s[-1] * tol.trend_ratio >= s[-2]
        and s[-2] * tol.trend_ratio >= s[-3]
        and s[-1] >= tol.decision_tol
    ):
        return DIVERGES
    return INCONCLUSIVE


def _tail_lo(side: int) -> int:
    return (side + 1) // 2


def p_limit(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
) -> Verdict:
    """Tail-rectangle limit: candidate from the largest stage, residuals per stage."""
    big = schedule.largest
    g = x.grid(big.M, big.N)
    cand = float(np.mean(g[_tail_lo(big.M):, _tail_lo(big.N):]))
    trace = []
    for tr in schedule.sizes:
        sub = g[_tail_lo(tr.M): tr.M + 1, _tail_lo(tr.N): tr.N + 1]
        trace.append((tr, float(np.max(np.abs(sub - cand)))))
    return Verdict(
        decision=decide_residuals([r for _, r in trace], tol),
        candidate_limit=cand,
        residual_trace=tuple(trace),
        mode="p",
    )


def bounded(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
) -> Verdict:
    big = schedule.largest
    g = x.grid(big.M, big.N)
    trace = []
    for tr in schedule.sizes:
        trace.append((tr, float(np.max(np.abs(g[: tr.M + 1, : tr.N + 1])))))
    sups = [s for _, s in trace]
    return Verdict(
        decision=decide_sups(sups, tol),
        candidate_limit=None,
        residual_trace=tuple(trace),
        mode="Mu",
        bound=sups[-1],
    )


def bp_limit(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
) -> Verdict:
    p = p_limit(x, schedule, tol)
    b = bounded(x, schedule, tol)
    if p.decision == CONVERGES and b.decision == CONVERGES:
        decision = CONVERGES
    elif p.decision == DIVERGES or b.decision == DIVERGES:
        decision = DIVERGES
    else:
        decision = INCONCLUSIVE
    return Verdict(
        decision=decision,
        candidate_limit=p.candidate_limit,
        residual_trace=p.residual_trace,
        mode="bp",
        bound=b.bound,
    )


def r_limit(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
) -> Verdict:
    """p-limit plus a single-sequence limit along every row and every column."""
    big = schedule.largest
    g = x.grid(big.M, big.N)
    cand = float(np.mean(g[_tail_lo(big.M):, _tail_lo(big.N):]))
    row_cand = g[:, _tail_lo(big.N):].mean(axis=1)
    col_cand = g[_tail_lo(big.M):, :].mean(axis=0)
    trace = []
    for tr in schedule.sizes:
        sub = g[_tail_lo(tr.M): tr.M + 1, _tail_lo(tr.N): tr.N + 1]
        res = float(np.max(np.abs(sub - cand)))
        rows = g[: tr.M + 1, _tail_lo(tr.N): tr.N + 1]
        res = max(res, float(np.max(np.abs(rows - row_cand[: tr.M + 1, None]))))
        cols = g[_tail_lo(tr.M): tr.M + 1, : tr.N + 1]
        res = max(res, float(np.max(np.abs(cols - col_cand[None, : tr.N + 1]))))
        trace.append((tr, res))
    return Verdict(
        decision=decide_residuals([r for _, r in trace], tol),
        candidate_limit=cand,
        residual_trace=tuple(trace),
        mode="r",
    )


def _centered_candidate(x: DoubleSequence, big: Truncation) -> float:
    q_hi, _ = canonical_extents(min(big.M, big.N))
    base_m = (big.M - q_hi) // 2
    base_n = (big.N - q_hi) // 2
    return window_mean(x, Window(base_m, base_n, q_hi, q_hi))


def _window_dev_sup(g: np.ndarray, side_m: int, side_n: int, target: float) -> float:
    """Sup over canonical windows and bases of |window mean - target|."""
    P = padded_prefix(g[: side_m + 1, : side_n + 1])
    worst = 0.0
    for q, qp in stage_extent_pairs(min(side_m, side_n)):
        means = window_sum_table(P, q, qp) / float((q + 1) * (qp + 1))
        worst = max(worst, float(np.max(np.abs(means - target))))
    return worst


def almost_limit(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
    L: Optional[float] = None,
) -> Verdict:
    """Window-mean limit, uniform over base positions.

    The candidate is the mean of the largest centered canonical window unless
    a target L is pinned (null spaces pin zero).
    """
    big = schedule.largest
    g = x.grid(big.M, big.N)
    cand = _centered_candidate(x, big) if L is None else float(L)
    trace = []
    for tr in schedule.sizes:
        trace.append((tr, _window_dev_sup(g, tr.M, tr.N, cand)))
    return Verdict(
        decision=decide_residuals([r for _, r in trace], tol),
        candidate_limit=cand,
        residual_trace=tuple(trace),
        mode="Cf",
    )


def strong_almost_limit(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
    L: Optional[float] = None,
) -> Verdict:
    """Window means of |x - L|; the candidate L is the almost-limit estimate."""
    big = schedule.largest
    g = x.grid(big.M, big.N)
    cand = _centered_candidate(x, big) if L is None else float(L)
    dev = np.abs(g - cand)
    trace = []
    for tr in schedule.sizes:
        trace.append((tr, _window_dev_sup(dev, tr.M, tr.N, 0.0)))
    return Verdict(
        decision=decide_residuals([r for _, r in trace], tol),
        candidate_limit=cand,
        residual_trace=tuple(trace),
        mode="SCf",
    )


def almost_cauchy(
    x: DoubleSequence,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
) -> Verdict:
    """Discrepancy between window means across admissible extents and bases.

    At stage i, extents from all stages up to i participate provided they
    exceed a floor that grows with the stage; the residual is the spread
    (max minus min) of every admissible window mean in the stage grid.
    """
    big = schedule.largest
    g = x.grid(big.M, big.N)
    sides = [min(tr.M, tr.N) for tr in schedule.sizes]
    trace = []
    for i, tr in enumerate(schedule.sizes):
        floor = canonical_extents(sides[i])[0] // 4
        extents = []
        for j in range(i + 1):
            for pair in stage_extent_pairs(sides[j]):
                if min(pair) > floor and pair not in extents:
                    extents.append(pair)
        P = padded_prefix(g[: tr.M + 1, : tr.N + 1])
        hi, lo = -math.inf, math.inf
        for q, qp in extents:
            means = window_sum_table(P, q, qp) / float((q + 1) * (qp + 1))
            hi = max(hi, float(np.max(means)))
            lo = min(lo, float(np.min(means)))
        trace.append((tr, hi - lo))
    return Verdict(
        decision=decide_residuals([r for _, r in trace], tol),
        candidate_limit=None,
        residual_trace=tuple(trace),
        mode="almost-cauchy",
    )


def membership(
    x: DoubleSequence,
    space: str,
    params: Optional[BParams] = None,
    schedule: TruncationSchedule = TruncationSchedule.default(),
    tol: ToleranceConfig = ToleranceConfig(),
) -> Verdict:
    """Finite-stage membership verdict for one of the named spaces.

    Tags prefixed with B first push x through the banded transform, which
    needs params.  Null spaces pin the limit at zero.
    """
    if space not in SPACE_TAGS:
        raise ValueError(f"unknown space tag {space!r}; known: {', '.join(SPACE_TAGS)}")
    if space in ("BCf", "BCf0", "BSCf", "BSCf0"):
        if params is None:
            raise ValueError(f"space {space} needs band parameters")
        y = b_transform(x, params)
        v = membership(y, space[1:], None, schedule, tol)
        return replace(v, mode=space)
    if space == "Mu":
        v = bounded(x, schedule, tol)
    elif space == "Cp":
        v = p_limit(x, schedule, tol)
    elif space == "Cbp":
        v = bp_limit(x, schedule, tol)
    elif space == "Cr":
        v = r_limit(x, schedule, tol)
    elif space == "Cf":
        v = almost_limit(x, schedule, tol)
    elif space == "Cf0":
        v = almost_limit(x, schedule, tol, L=0.0)
    elif space == "SCf":
        v = strong_almost_limit(x, schedule, tol)
    else:  # SCf0
        v = strong_almost_limit(x, schedule, tol, L=0.0)
    return replace(v, mode=space)
