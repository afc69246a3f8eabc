"""Numerical toolkit for banded difference transforms of double sequences.

The package treats a double sequence as a rule on index pairs, evaluates it
on growing truncations, and answers three kinds of questions: where a
transformed sequence lands (membership verdicts with residual traces),
whether a four-dimensional kernel belongs to a mapping class (condition
suites), and which coefficient sequences pair summably against a banded
domain (dual-set conditions).
"""

from .seqcore import (
    DoubleSequence,
    Index,
    Truncation,
    Window,
    corpus,
    corpus_names,
    from_array,
    lq_norm,
    norm_Cf,
    norm_strong,
    partial_sums,
    sup_abs,
    window_mean,
)
from .matrix4d import (
    ApplyResult,
    BParams,
    FourDimMatrix,
    apply,
    b_kernel,
    b_transform,
    cesaro_kernel,
    compose,
    d_kernel,
    e_kernel,
    f_kernel,
    g_kernel,
    identity_kernel,
    inverse_transform,
    matrix_from_array,
    norm_BCf,
    zero_kernel,
)
from .convergence import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    SPACE_TAGS,
    ToleranceConfig,
    TruncationSchedule,
    Verdict,
    almost_cauchy,
    almost_limit,
    bounded,
    bp_limit,
    membership,
    p_limit,
    r_limit,
    strong_almost_limit,
)
from .classcheck import (
    B_DOMAIN_CLASS_IDS,
    DUAL_CONDITION_IDS,
    ClassReport,
    ConditionReport,
    IndexSet,
    beta_dual_report,
    check_B_domain_class,
    check_Cf_to_Mu,
    check_almost_conservative,
    check_almost_regular,
    check_cbp_conservative,
    check_cbp_regular,
    check_strong_almost_to_almost,
    check_strong_to_bp,
    check_strongly_regular,
    diagonal_set,
    dual_membership,
    first_row_set,
    full_plane_set,
    gamma_dual_report,
    zero_density_check,
)
from .expr import ExprError, expr_sequence
from .config import Config, ConfigError, parse_config, serialize_config
from .battery import BATTERY_SEED, run_all

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # sequences
    "DoubleSequence",
    "Index",
    "Window",
    "Truncation",
    "corpus",
    "corpus_names",
    "from_array",
    "window_mean",
    "sup_abs",
    "norm_Cf",
    "norm_strong",
    "norm_BCf",
    "lq_norm",
    "partial_sums",
    # kernels
    "BParams",
    "FourDimMatrix",
    "ApplyResult",
    "b_kernel",
    "f_kernel",
    "d_kernel",
    "e_kernel",
    "g_kernel",
    "cesaro_kernel",
    "identity_kernel",
    "zero_kernel",
    "matrix_from_array",
    "b_transform",
    "inverse_transform",
    "apply",
    "compose",
    # verdicts
    "CONVERGES",
    "DIVERGES",
    "INCONCLUSIVE",
    "SPACE_TAGS",
    "ToleranceConfig",
    "TruncationSchedule",
    "Verdict",
    "p_limit",
    "bp_limit",
    "r_limit",
    "bounded",
    "almost_limit",
    "strong_almost_limit",
    "almost_cauchy",
    "membership",
    # class suites and duals
    "B_DOMAIN_CLASS_IDS",
    "DUAL_CONDITION_IDS",
    "ClassReport",
    "ConditionReport",
    "IndexSet",
    "diagonal_set",
    "first_row_set",
    "full_plane_set",
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
    "dual_membership",
    "beta_dual_report",
    "gamma_dual_report",
    # expressions and configs
    "ExprError",
    "expr_sequence",
    "Config",
    "ConfigError",
    "parse_config",
    "serialize_config",
    # battery
    "BATTERY_SEED",
    "run_all",
]
