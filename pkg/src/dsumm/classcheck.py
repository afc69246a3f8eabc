"""Finite-stage checkers for 4-D matrix classes and dual-set membership.

A matrix class is characterized by a handful of scalar conditions: bounded
row sums, entry limits, strip sums that must vanish, sparse difference sums
over zero-density index sets, and window-mean analogues of all of these.
Each condition is evaluated over a schedule of stage sides and reported as
a trend plus a three-way verdict (pass, fail, inconclusive), reusing the
residual and boundedness engines from the convergence module.  A class
report is the conjunction of its condition reports.

Regular variants pin the target constants (entry limits zero, total sum
one); conservative variants estimate them from the largest stage.  The
B-domain classes are checked by delegating to these suites on the derived
kernels E(A) and G(A).

Dual-set membership follows the same pattern on the folded kernel D(a).
Three of the seven conditions compare the unscaled fold (no 1/(r t) factor)
against entrywise limit constants; the remaining four act on the scaled
kernel.  The beta report is the conjunction of all seven; the gamma report
combines bounded fold rows with partial-sum boundedness probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .seqcore import (
    DoubleSequence,
    Truncation,
    corpus,
    lq_norm,
    padded_prefix,
    window_sum_table,
)
from .matrix4d import BParams, FourDimMatrix, d_kernel, e_kernel, g_kernel
from .convergence import (
    CONVERGES,
    DIVERGES,
    ToleranceConfig,
    canonical_extents,
    decide_residuals,
    decide_sups,
    stage_extent_pairs,
)

__all__ = [
    "PASS",
    "FAIL",
    "UNDECIDED",
    "IndexSet",
    "diagonal_set",
    "full_plane_set",
    "first_row_set",
    "ConditionReport",
    "ClassReport",
    "delta10",
    "delta01",
    "delta11",
    "matrix_window_mean",
    "zero_density_check",
    "check_cbp_conservative",
    "check_cbp_regular",
    "check_strong_to_bp",
    "check_almost_conservative",
    "check_almost_regular",
    "check_strongly_regular",
    "check_strong_almost_to_almost",
    "check_Cf_to_Mu",
    "check_B_domain_class",
    "B_DOMAIN_CLASS_IDS",
    "dual_membership",
    "beta_dual_report",
    "gamma_dual_report",
    "DUAL_CONDITION_IDS",
]

PASS = "pass"
FAIL = "fail"
UNDECIDED = "inconclusive"

_DECISION_TO_VERDICT = {CONVERGES: PASS, DIVERGES: FAIL}

DEFAULT_STAGES = (8, 16, 32)

B_DOMAIN_CLASS_IDS = (
    "BSCf_to_Cf",
    "BSCf_to_Mu",
    "BSCf_to_Cbp",
    "SCf_to_BMu",
    "SCf_to_BCbp",
)

DUAL_CONDITION_IDS = ("d1", "d2", "d3", "d4", "d5", "d6", "d7", "alpha")

_PROBE_RANGE = range(3)


def _verdict(decision: str) -> str:
    return _DECISION_TO_VERDICT.get(decision, UNDECIDED)


def _tail_lo(side: int) -> int:
    return (side + 1) // 2


# ---------------------------------------------------------------------------
# index sets

@dataclass(frozen=True, eq=False)
class IndexSet:
    """A subset of the index plane given by a membership predicate."""

    contains: Callable[[int, int], bool]
    name: str
    mask_rule: Optional[Callable[[int, int], np.ndarray]] = None

    def mask(self, M: int, N: int) -> np.ndarray:
        """Boolean grid of shape (M+1, N+1); cell (k, l) says (k, l) in E."""
        if self.mask_rule is not None:
            out = np.asarray(self.mask_rule(M, N), dtype=bool)
            if out.shape != (M + 1, N + 1):
                raise ValueError("mask_rule returned a grid of the wrong shape")
            return out
        out = np.empty((M + 1, N + 1), dtype=bool)
        for k in range(M + 1):
            for l in range(N + 1):
                out[k, l] = bool(self.contains(k, l))
        return out

    def count_in_rectangle(self, m: int, n: int, p: int, q: int) -> int:
        """Exact count of E inside {m <= j <= m+p-1, n <= k <= n+q-1}."""
        total = 0
        for j in range(m, m + p):
            for k in range(n, n + q):
                if self.contains(j, k):
                    total += 1
        return total


def diagonal_set() -> IndexSet:
    return IndexSet(
        contains=lambda k, l: k == l,
        name="diagonal",
        mask_rule=lambda M, N: np.eye(M + 1, N + 1, dtype=bool),
    )


def full_plane_set() -> IndexSet:
    return IndexSet(
        contains=lambda k, l: True,
        name="full-plane",
        mask_rule=lambda M, N: np.ones((M + 1, N + 1), dtype=bool),
    )


def first_row_set() -> IndexSet:
    return IndexSet(
        contains=lambda k, l: k == 0,
        name="first-row",
        mask_rule=lambda M, N: (np.arange(M + 1) == 0)[:, None] & np.ones((1, N + 1), dtype=bool),
    )


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    trend: tuple
    verdict: str
    constants: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClassReport:
    class_id: str
    conditions: tuple
    overall: str

    @staticmethod
    def from_conditions(class_id: str, conditions) -> "ClassReport":
        conds = tuple(conditions)
        if any(c.verdict == FAIL for c in conds):
            overall = FAIL
        elif all(c.verdict == PASS for c in conds):
            overall = PASS
        else:
            overall = UNDECIDED
        return ClassReport(class_id=class_id, conditions=conds, overall=overall)


# ---------------------------------------------------------------------------
# entry differences and window means

def delta10(A: FourDimMatrix, m: int, n: int, k: int, l: int) -> float:
    """Forward difference of row (m, n) in the first column index."""
    return A(m, n, k, l) - A(m, n, k + 1, l)


def delta01(A: FourDimMatrix, m: int, n: int, k: int, l: int) -> float:
    return A(m, n, k, l) - A(m, n, k, l + 1)


def delta11(A: FourDimMatrix, m: int, n: int, k: int, l: int) -> float:
    """Mixed second difference; equals delta10 applied after delta01."""
    return (
        A(m, n, k, l)
        - A(m, n, k + 1, l)
        - A(m, n, k, l + 1)
        + A(m, n, k + 1, l + 1)
    )


def matrix_window_mean(A: FourDimMatrix, i: int, j: int, q: int, qp: int, m: int, n: int) -> float:
    """Mean of column (i, j) over the window of rows [m, m+q] x [n, n+qp]."""
    if min(i, j, q, qp, m, n) < 0:
        raise ValueError("window-mean arguments must be non-negative")
    acc = 0.0
    for k in range(m, m + q + 1):
        for l in range(n, n + qp + 1):
            acc += A(k, l, i, j)
    return acc / ((q + 1) * (qp + 1))


# ---------------------------------------------------------------------------
# zero density

def zero_density_check(
    E: IndexSet,
    sides: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ConditionReport:
    """Worst window density of E over square windows of the given sides.

    For side p the density is max over bases (m, n) <= (2p, 2p) of
    count(E in the p x p window at (m, n)) / p^2; the set passes when the
    trend decides to zero.
    """
    trend = []
    for p in sides:
        if p < 1:
            raise ValueError("window sides must be positive")
        L = 3 * p
        mask = E.mask(L, L).astype(float)
        P = padded_prefix(mask)
        counts = window_sum_table(P, p - 1, p - 1)
        trend.append((p, float(counts.max()) / float(p * p)))
    decision = decide_residuals([v for _, v in trend], tol)
    return ConditionReport(
        condition_id=f"zero-density({E.name})",
        trend=tuple(trend),
        verdict=_verdict(decision),
        constants={"max-density": trend[-1][1]},
    )


def _require_zero_density(E_sets, stages, tol):
    for E in E_sets:
        rep = zero_density_check(E, stages, tol)
        if rep.verdict != PASS:
            raise ValueError(
                f"index set {E.name!r} fails the zero-density requirement"
            )


# ---------------------------------------------------------------------------
# entrywise suites

def _residual_condition(condition_id, trend, tol, constants=None):
    decision = decide_residuals([v for _, v in trend], tol)
    return ConditionReport(condition_id, tuple(trend), _verdict(decision), constants or {})


def _sup_condition(condition_id, trend, tol, constants=None):
    decision = decide_sups([v for _, v in trend], tol)
    return ConditionReport(condition_id, tuple(trend), _verdict(decision), constants or {})


def _cbp_conditions(A: FourDimMatrix, stages, tol, regular: bool):
    S = max(stages)
    B4 = A.block4(S, S, S, S)
    tl_big = _tail_lo(S)
    if regular:
        a_hat = np.zeros((S + 1, S + 1))
        v_hat = 1.0
    else:
        a_hat = B4[tl_big:, tl_big:, :, :].mean(axis=(0, 1))
        v_hat = float(B4[tl_big:, tl_big:, :, :].sum(axis=(2, 3)).mean())
    rows_abs = np.abs(B4).sum(axis=(2, 3))
    row_sums = B4.sum(axis=(2, 3))

    sup_trend, entry_trend, total_trend, col_trend, row_trend = [], [], [], [], []
    for side in stages:
        tl = _tail_lo(side)
        sup_trend.append((side, float(rows_abs[: side + 1, : side + 1].max())))
        tail4 = B4[tl: side + 1, tl: side + 1]
        entry_res = 0.0
        for k in _PROBE_RANGE:
            for l in _PROBE_RANGE:
                entry_res = max(
                    entry_res,
                    float(np.max(np.abs(tail4[:, :, k, l] - a_hat[k, l]))),
                )
        entry_trend.append((side, entry_res))
        total_trend.append(
            (side, float(np.max(np.abs(row_sums[tl: side + 1, tl: side + 1] - v_hat))))
        )
        col_res = 0.0
        for l0 in _PROBE_RANGE:
            strip = np.abs(tail4[:, :, : side + 1, l0] - a_hat[None, None, : side + 1, l0])
            col_res = max(col_res, float(strip.sum(axis=2).max()))
        col_trend.append((side, col_res))
        row_res = 0.0
        for k0 in _PROBE_RANGE:
            strip = np.abs(tail4[:, :, k0, : side + 1] - a_hat[None, None, k0, : side + 1])
            row_res = max(row_res, float(strip.sum(axis=2).max()))
        row_trend.append((side, row_res))

    consts = {"total": v_hat}
    if not regular:
        for k in _PROBE_RANGE:
            for l in _PROBE_RANGE:
                consts[f"a[{k},{l}]"] = float(a_hat[k, l])
    return [
        _sup_condition("row-abs-sup", sup_trend, tol, {"sup": sup_trend[-1][1]}),
        _residual_condition("entry-limits", entry_trend, tol, consts),
        _residual_condition("row-sum-limit", total_trend, tol, {"total": v_hat}),
        _residual_condition("column-strips", col_trend, tol),
        _residual_condition("row-strips", row_trend, tol),
    ]


def check_cbp_conservative(
    A: FourDimMatrix,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Bounded rows plus entry, total, and strip limits with free constants."""
    return ClassReport.from_conditions(
        "cbp-conservative", _cbp_conditions(A, stages, tol, regular=False)
    )


def check_cbp_regular(
    A: FourDimMatrix,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Same conditions with entry limits pinned at zero and total at one."""
    return ClassReport.from_conditions(
        "cbp-regular", _cbp_conditions(A, stages, tol, regular=True)
    )


def _shift_neg(arr: np.ndarray, axis: int) -> np.ndarray:
    """arr advanced one step along axis, zero-filled at the far edge."""
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[axis] = slice(1, None)
    dst[axis] = slice(None, -1)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _sparse_delta_conditions(B4, E_sets, stages, tol, kinds):
    """Tail-row sums of |delta entries| over each sparse set.

    kinds is a subset of {"k", "l", "kl"}; differences act on the column
    indices with zero fill past the block edge.
    """
    S = B4.shape[0] - 1
    shifted_k = _shift_neg(B4, 2)
    shifted_l = _shift_neg(B4, 3)
    diffs = {}
    if "k" in kinds:
        diffs["k"] = np.abs(B4 - shifted_k)
    if "l" in kinds:
        diffs["l"] = np.abs(B4 - shifted_l)
    if "kl" in kinds:
        diffs["kl"] = np.abs(B4 - shifted_k - shifted_l + _shift_neg(shifted_k, 3))
    out = []
    for E in E_sets:
        mask = E.mask(S, S)
        for kind in kinds:
            trend = []
            for side in stages:
                tl = _tail_lo(side)
                block = diffs[kind][tl: side + 1, tl: side + 1, : side + 1, : side + 1]
                msk = mask[: side + 1, : side + 1]
                sums = (block * msk[None, None, :, :]).sum(axis=(2, 3))
                trend.append((side, float(sums.max())))
            out.append(
                _residual_condition(f"sparse-delta-{kind}({E.name})", trend, tol)
            )
    return out


def check_strong_to_bp(
    A: FourDimMatrix,
    E_sets: Optional[Sequence[IndexSet]] = None,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Regular conditions plus vanishing sparse difference sums per index set."""
    E_sets = tuple(E_sets) if E_sets is not None else (diagonal_set(),)
    _require_zero_density(E_sets, stages, tol)
    conds = _cbp_conditions(A, stages, tol, regular=True)
    S = max(stages)
    B4 = A.block4(S, S, S, S)
    conds.extend(_sparse_delta_conditions(B4, E_sets, stages, tol, ("k", "l")))
    return ClassReport.from_conditions("strong-to-bp", conds)


# ---------------------------------------------------------------------------
# window-mean suites

def _window_mean_tables(B4: np.ndarray, side: int):
    """Yield (q, qp, means) for the stage's canonical extents.

    B4 is indexed [row_k, row_l, col_i, col_j]; means[m, n, i, j] is the
    average of column (i, j) over rows [m, m+q] x [n, n+qp].
    """
    sub = B4[: side + 1, : side + 1, : side + 1, : side + 1]
    P = np.zeros((side + 2, side + 2, side + 1, side + 1))
    P[1:, 1:] = sub.cumsum(axis=0).cumsum(axis=1)
    for q, qp in stage_extent_pairs(side):
        sums = (
            P[q + 1:, qp + 1:]
            - P[: -q - 1, qp + 1:]
            - P[q + 1:, : -qp - 1]
            + P[: -q - 1, : -qp - 1]
        )
        yield q, qp, sums / float((q + 1) * (qp + 1))


def _almost_conditions(A: FourDimMatrix, stages, tol, regular: bool, with_deltas: bool):
    S = max(stages)
    B4 = A.block4(S, S, S, S)
    rows_abs = np.abs(B4).sum(axis=(2, 3))

    if regular:
        a_hat = np.zeros((S + 1, S + 1))
        u_hat = 1.0
    else:
        q_hi, _ = canonical_extents(S)
        for q, qp, means in _window_mean_tables(B4, S):
            if (q, qp) == (q_hi, q_hi):
                a_hat = means.mean(axis=(0, 1))
                u_hat = float(means.sum(axis=(2, 3)).mean())
                break

    sup_trend, entry_trend, total_trend = [], [], []
    col_trend, row_trend = [], []
    dk_trend, dl_trend = [], []
    for side in stages:
        sup_trend.append((side, float(rows_abs[: side + 1, : side + 1].max())))
        entry_res = total_res = col_res = row_res = 0.0
        dk_res = dl_res = 0.0
        for q, qp, means in _window_mean_tables(B4, side):
            for i in _PROBE_RANGE:
                for j in _PROBE_RANGE:
                    entry_res = max(
                        entry_res,
                        float(np.max(np.abs(means[:, :, i, j] - a_hat[i, j]))),
                    )
            totals = means.sum(axis=(2, 3))
            total_res = max(total_res, float(np.max(np.abs(totals - u_hat))))
            for j0 in _PROBE_RANGE:
                strip = np.abs(means[:, :, :, j0] - a_hat[None, None, : side + 1, j0])
                col_res = max(col_res, float(strip.sum(axis=2).max()))
            for i0 in _PROBE_RANGE:
                strip = np.abs(means[:, :, i0, :] - a_hat[None, None, i0, : side + 1])
                row_res = max(row_res, float(strip.sum(axis=2).max()))
            if with_deltas:
                dk = np.abs(means - _shift_neg(means, 2)).sum(axis=(2, 3))
                dl = np.abs(means - _shift_neg(means, 3)).sum(axis=(2, 3))
                dk_res = max(dk_res, float(dk.max()))
                dl_res = max(dl_res, float(dl.max()))
        entry_trend.append((side, entry_res))
        total_trend.append((side, total_res))
        col_trend.append((side, col_res))
        row_trend.append((side, row_res))
        if with_deltas:
            dk_trend.append((side, dk_res))
            dl_trend.append((side, dl_res))

    consts = {"total": u_hat}
    if not regular:
        for i in _PROBE_RANGE:
            for j in _PROBE_RANGE:
                consts[f"a[{i},{j}]"] = float(a_hat[i, j])
    conds = [
        _sup_condition("row-abs-sup", sup_trend, tol, {"sup": sup_trend[-1][1]}),
        _residual_condition("window-entry-limits", entry_trend, tol, consts),
        _residual_condition("window-total-limit", total_trend, tol, {"total": u_hat}),
        _residual_condition("window-column-strips", col_trend, tol),
        _residual_condition("window-row-strips", row_trend, tol),
    ]
    if with_deltas:
        conds.append(_residual_condition("window-delta-k-total", dk_trend, tol))
        conds.append(_residual_condition("window-delta-l-total", dl_trend, tol))
    return conds


def check_almost_conservative(
    A: FourDimMatrix,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Window-mean limits of columns, totals, and strips with free constants."""
    return ClassReport.from_conditions(
        "almost-conservative",
        _almost_conditions(A, stages, tol, regular=False, with_deltas=False),
    )


def check_almost_regular(
    A: FourDimMatrix,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Window-mean conditions with column limits zero and total one."""
    return ClassReport.from_conditions(
        "almost-regular",
        _almost_conditions(A, stages, tol, regular=True, with_deltas=False),
    )


def check_strongly_regular(
    A: FourDimMatrix,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Almost regularity plus vanishing window-mean difference totals."""
    return ClassReport.from_conditions(
        "strongly-regular",
        _almost_conditions(A, stages, tol, regular=True, with_deltas=True),
    )


def check_strong_almost_to_almost(
    A: FourDimMatrix,
    E_sets: Optional[Sequence[IndexSet]] = None,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Almost regularity plus vanishing mixed-difference sums per sparse set."""
    E_sets = tuple(E_sets) if E_sets is not None else (diagonal_set(),)
    _require_zero_density(E_sets, stages, tol)
    conds = _almost_conditions(A, stages, tol, regular=True, with_deltas=False)
    S = max(stages)
    B4 = A.block4(S, S, S, S)
    conds.extend(_sparse_delta_conditions(B4, E_sets, stages, tol, ("kl",)))
    return ClassReport.from_conditions("strong-almost-to-almost", conds)


# ---------------------------------------------------------------------------
# rows-into-bounded suite

_BETA_PROBE_WITNESSES = ("e", "alt-col", "checkerboard")


def check_Cf_to_Mu(
    A: FourDimMatrix,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Bounded row sums plus a row-pairing stabilization probe.

    The pairing probe stands in for per-row dual membership: a handful of
    fixed rows are paired against bounded witnesses with window limits and
    their truncated products must stabilize as the column range grows.
    """
    S = max(stages)
    B4 = A.block4(S, S, S, S)
    rows_abs = np.abs(B4).sum(axis=(2, 3))
    sup_trend = [
        (side, float(rows_abs[: side + 1, : side + 1].max())) for side in stages
    ]

    s0 = stages[0]
    probe_rows = ((s0, s0), (s0, s0 // 2), (s0 // 2, s0))
    witnesses = [corpus(name) for name in _BETA_PROBE_WITNESSES]
    sides_ext = [max(1, s0 // 2)] + list(stages)
    partials = np.empty((len(probe_rows), len(witnesses), len(sides_ext)))
    for a_i, (m, n) in enumerate(probe_rows):
        for w_i, x in enumerate(witnesses):
            xg = x.grid(max(stages), max(stages))
            for s_i, side in enumerate(sides_ext):
                row = A.row_block(m, n, side, side)
                partials[a_i, w_i, s_i] = float(
                    np.sum(row * xg[: side + 1, : side + 1])
                )
    probe_trend = []
    for s_i, side in enumerate(stages):
        move = float(np.max(np.abs(partials[:, :, s_i + 1] - partials[:, :, s_i])))
        probe_trend.append((side, move))

    conds = [
        _sup_condition("row-abs-sup", sup_trend, tol, {"sup": sup_trend[-1][1]}),
        _residual_condition("rows-beta-probe", probe_trend, tol),
    ]
    return ClassReport.from_conditions("Cf-to-Mu", conds)


# ---------------------------------------------------------------------------
# B-domain classes via derived kernels

def check_B_domain_class(
    A: FourDimMatrix,
    class_id: str,
    p: BParams,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
    E_sets: Optional[Sequence[IndexSet]] = None,
) -> ClassReport:
    """Check one of the five B-domain classes on the matching derived kernel."""
    if class_id not in B_DOMAIN_CLASS_IDS:
        raise ValueError(
            f"unknown class id {class_id!r}; known: {', '.join(B_DOMAIN_CLASS_IDS)}"
        )
    if class_id.startswith("BSCf"):
        derived = e_kernel(A, p)
    else:
        derived = g_kernel(A, p)
    if class_id == "BSCf_to_Cf":
        rep = check_strong_almost_to_almost(derived, E_sets, stages, tol)
    elif class_id == "BSCf_to_Cbp":
        rep = check_strong_to_bp(derived, E_sets, stages, tol)
    elif class_id == "BSCf_to_Mu":
        rep = check_Cf_to_Mu(derived, stages, tol)
    elif class_id == "SCf_to_BMu":
        rep = check_Cf_to_Mu(derived, stages, tol)
    else:  # SCf_to_BCbp
        rep = check_strong_to_bp(derived, E_sets, stages, tol)
    return ClassReport(class_id=class_id, conditions=rep.conditions, overall=rep.overall)


# ---------------------------------------------------------------------------
# dual sets

def _geom_weights(ratio: float, count: int) -> np.ndarray:
    return np.power(float(ratio), np.arange(count, dtype=float))


def _fold_cube_fixed_l(ag: np.ndarray, sigma: float, tau: float, l0: int) -> np.ndarray:
    """T[m, n, k] = sum over j in [k, m], i in [l0, n] of sigma^(j-k) tau^(i-l0) a[j, i]."""
    X = ag.shape[0] - 1
    W = np.zeros_like(ag)
    if l0 <= ag.shape[1] - 1:
        w = _geom_weights(tau, ag.shape[1] - l0)
        W[:, l0:] = (ag[:, l0:] * w[None, :]).cumsum(axis=1)
    T = np.zeros((X + 1, ag.shape[1], X + 1))
    for k in range(X, -1, -1):
        if k < X:
            T[:, :, k] = sigma * T[:, :, k + 1]
        T[k:, :, k] += W[k, :][None, :]
    return T


def _fold_cube_fixed_k(ag: np.ndarray, sigma: float, tau: float, k0: int) -> np.ndarray:
    """T[m, n, l] = sum over j in [k0, m], i in [l, n] of sigma^(j-k0) tau^(i-l) a[j, i]."""
    Y = ag.shape[1] - 1
    V = np.zeros_like(ag)
    if k0 <= ag.shape[0] - 1:
        w = _geom_weights(sigma, ag.shape[0] - k0)
        V[k0:, :] = (ag[k0:, :] * w[:, None]).cumsum(axis=0)
    T = np.zeros((ag.shape[0], Y + 1, Y + 1))
    for l in range(Y, -1, -1):
        if l < Y:
            T[:, :, l] = tau * T[:, :, l + 1]
        T[:, l:, l] += V[:, l][:, None]
    return T


class _DualScans:
    """Shared computations for the seven dual conditions on one (a, p) pair.

    Constants are estimated on an extension grid twice the largest stage;
    stage residuals are read off the same arrays so the two stay coherent.
    """

    def __init__(self, a: DoubleSequence, p: BParams, stages):
        self.a = a
        self.p = p
        self.stages = tuple(stages)
        self.S = max(stages)
        self.X = 2 * self.S
        self._memo = {}

    def ext_grid(self) -> np.ndarray:
        if "ag" not in self._memo:
            self._memo["ag"] = self.a.grid(self.X, self.X)
        return self._memo["ag"]

    def d_block(self) -> np.ndarray:
        if "D4" not in self._memo:
            self._memo["D4"] = d_kernel(self.a, self.p).block4(self.S, self.S, self.S, self.S)
        return self._memo["D4"]

    def cube_l(self, l0: int) -> np.ndarray:
        key = ("cl", l0)
        if key not in self._memo:
            self._memo[key] = _fold_cube_fixed_l(self.ext_grid(), self.p.sigma, self.p.tau, l0)
        return self._memo[key]

    def cube_k(self, k0: int) -> np.ndarray:
        key = ("ck", k0)
        if key not in self._memo:
            self._memo[key] = _fold_cube_fixed_k(self.ext_grid(), self.p.sigma, self.p.tau, k0)
        return self._memo[key]

    def row_sum_grid(self) -> np.ndarray:
        # total of the scaled fold row: cumulative sums against geometric prefixes
        if "rs" not in self._memo:
            ag = self.ext_grid()
            g1 = np.cumsum(_geom_weights(self.p.sigma, ag.shape[0]))
            g2 = np.cumsum(_geom_weights(self.p.tau, ag.shape[1]))
            w = ag * g1[:, None] * g2[None, :]
            self._memo["rs"] = w.cumsum(axis=0).cumsum(axis=1) / self.p.rt
        return self._memo["rs"]

    def _tail_mean(self, grid2d: np.ndarray) -> float:
        t = _tail_lo(self.X)
        return float(grid2d[t:, t:].mean())


def _dual_condition(scans: _DualScans, which: str, tol: ToleranceConfig, E: IndexSet) -> ConditionReport:
    stages = scans.stages
    if which == "d1":
        D4 = scans.d_block()
        rows = np.abs(D4).sum(axis=(2, 3))
        trend = [(s, float(rows[: s + 1, : s + 1].max())) for s in stages]
        return _sup_condition("transform-row-abs-sup", trend, tol, {"sup": trend[-1][1]})

    if which == "d2":
        consts = {}
        trend = []
        per_stage = {s: 0.0 for s in stages}
        for l0 in _PROBE_RANGE:
            cube = scans.cube_l(l0)
            for k0 in _PROBE_RANGE:
                sheet = cube[:, :, k0]
                beta = scans._tail_mean(sheet)
                consts[f"beta[{k0},{l0}]"] = beta
                for s in stages:
                    t = _tail_lo(s)
                    dev = float(np.max(np.abs(sheet[t: s + 1, t: s + 1] - beta)))
                    per_stage[s] = max(per_stage[s], dev)
        trend = [(s, per_stage[s]) for s in stages]
        return _residual_condition("transform-entry-limits", trend, tol, consts)

    if which == "d3":
        rs = scans.row_sum_grid()
        u_hat = scans._tail_mean(rs)
        trend = []
        for s in stages:
            t = _tail_lo(s)
            trend.append((s, float(np.max(np.abs(rs[t: s + 1, t: s + 1] - u_hat)))))
        return _residual_condition("transform-total-limit", trend, tol, {"total": u_hat})

    if which == "d4":
        per_stage = {s: 0.0 for s in stages}
        for l0 in _PROBE_RANGE:
            cube = scans.cube_l(l0)
            t_ext = _tail_lo(scans.X)
            beta_vec = cube[t_ext:, t_ext:, :].mean(axis=(0, 1))
            for s in stages:
                t = _tail_lo(s)
                dev = np.abs(cube[t: s + 1, t: s + 1, : s + 1] - beta_vec[None, None, : s + 1])
                per_stage[s] = max(per_stage[s], float(dev.sum(axis=2).max()))
        trend = [(s, per_stage[s]) for s in stages]
        return _residual_condition("transform-column-strips", trend, tol)

    if which == "d5":
        per_stage = {s: 0.0 for s in stages}
        for k0 in _PROBE_RANGE:
            cube = scans.cube_k(k0)
            t_ext = _tail_lo(scans.X)
            beta_vec = cube[t_ext:, t_ext:, :].mean(axis=(0, 1))
            for s in stages:
                t = _tail_lo(s)
                dev = np.abs(cube[t: s + 1, t: s + 1, : s + 1] - beta_vec[None, None, : s + 1])
                per_stage[s] = max(per_stage[s], float(dev.sum(axis=2).max()))
        trend = [(s, per_stage[s]) for s in stages]
        return _residual_condition("transform-row-strips", trend, tol)

    if which in ("d6", "d7"):
        D4 = scans.d_block()
        axis = 3 if which == "d6" else 2
        diff = np.abs(D4 - _shift_neg(D4, axis))
        mask = E.mask(scans.S, scans.S)
        trend = []
        for s in stages:
            t = _tail_lo(s)
            block = diff[t: s + 1, t: s + 1, : s + 1, : s + 1]
            msk = mask[: s + 1, : s + 1]
            sums = (block * msk[None, None, :, :]).sum(axis=(2, 3))
            trend.append((s, float(sums.max())))
        kind = "l" if which == "d6" else "k"
        return _residual_condition(f"transform-sparse-delta-{kind}({E.name})", trend, tol)

    if which == "alpha":
        if not scans.p.contractive:
            raise ValueError(
                "the absolute-summability dual requires |s/r| < 1 and |u/t| < 1"
            )
        trend = [
            (s, lq_norm(scans.a, Truncation(s, s), 1.0)) for s in stages
        ]
        return _sup_condition("abs-sum-trend", trend, tol, {"sum": trend[-1][1]})

    raise ValueError(f"unknown dual condition {which!r}; known: {', '.join(DUAL_CONDITION_IDS)}")


def dual_membership(
    a: DoubleSequence,
    which: str,
    p: BParams,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
    E: Optional[IndexSet] = None,
) -> ConditionReport:
    """One dual condition for the coefficient sequence a under parameters p."""
    E = E if E is not None else diagonal_set()
    if which in ("d6", "d7"):
        _require_zero_density((E,), stages, tol)
    return _dual_condition(_DualScans(a, p, stages), which, tol, E)


def beta_dual_report(
    a: DoubleSequence,
    p: BParams,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
    E: Optional[IndexSet] = None,
) -> ClassReport:
    """Conjunction of the seven fold conditions."""
    E = E if E is not None else diagonal_set()
    _require_zero_density((E,), stages, tol)
    scans = _DualScans(a, p, stages)
    conds = [
        _dual_condition(scans, w, tol, E)
        for w in ("d1", "d2", "d3", "d4", "d5", "d6", "d7")
    ]
    return ClassReport.from_conditions("beta-dual", conds)


_GAMMA_WITNESSES = ("e", "zero", "k-over-rt")


def gamma_dual_report(
    a: DoubleSequence,
    p: BParams,
    stages: Sequence[int] = DEFAULT_STAGES,
    tol: ToleranceConfig = ToleranceConfig(),
) -> ClassReport:
    """Bounded fold rows joined with bounded partial-sum probes.

    The probes pair a against fixed witnesses from the banded domain and
    ask only that the truncated products stay bounded.
    """
    scans = _DualScans(a, p, stages)
    d1 = _dual_condition(scans, "d1", tol, diagonal_set())
    S = max(stages)
    trend = []
    grids = []
    for name in _GAMMA_WITNESSES:
        x = corpus(name, p) if name == "k-over-rt" else corpus(name)
        grids.append(x.grid(S, S))
    ag = a.grid(S, S)
    for s in stages:
        worst = 0.0
        for xg in grids:
            prod = ag[: s + 1, : s + 1] * xg[: s + 1, : s + 1]
            worst = max(worst, abs(float(prod.sum())))
        trend.append((s, worst))
    probe = _sup_condition("product-partial-sums-bounded", trend, tol)
    return ClassReport.from_conditions("gamma-dual", (d1, probe))
