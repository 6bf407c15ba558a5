"""Condition numbers of indefinite and total least squares problems.

Exact partial condition numbers (normwise, mixed, componentwise, unified),
their structured counterparts for Toeplitz/Hankel/symmetric data, the total
least squares bridge, and cheap statistical estimators.
"""

from .estimate import (
    NormInterval,
    SsceConfig,
    estimate_kappa2_pce,
    estimate_kappa2_ssce,
    estimate_kappa_inf_ssce,
    spectral_interval,
    wallis,
)
from .exact import (
    CondParams,
    JacobianMg,
    UndefinedConditionNumber,
    build_mg,
    kappa_2ils,
    kappa_2ils_cross,
    kappa_componentwise,
    kappa_lls_svd_check,
    kappa_mixed,
    kappa_unified,
)
from .ils import (
    IllConditionedWarning,
    IlsProblem,
    IlsSolution,
    NotPositiveDefinite,
    SignatureSplit,
    apply_minv,
    check_spd,
    solve_ils,
)
from .kron import VecPermutation, entrywise_div, kron_apply, unvec, vec, vec_perm_apply
from .probfile import load_problem, save_problem
from .structured import (
    StructureBasis,
    StructureMismatch,
    StructuredParams,
    extract,
    kappa_2ils_structured,
    kappa_componentwise_structured,
    kappa_inf_structured_general,
    kappa_mixed_structured,
    make_basis,
)
from .tls import (
    ComposedBlocks,
    StackedProblem,
    TlsNotGeneric,
    TlsProblem,
    kappa_2tls,
    kappa_componentwise_tls,
    kappa_composed_ils,
    kappa_mixed_tls,
    kappa_structured_tls,
    solve_tls,
    tls_blocks,
    tls_jacobian,
)

__all__ = [
    "CondParams",
    "ComposedBlocks",
    "IllConditionedWarning",
    "IlsProblem",
    "IlsSolution",
    "JacobianMg",
    "NormInterval",
    "NotPositiveDefinite",
    "SignatureSplit",
    "SsceConfig",
    "StackedProblem",
    "StructureBasis",
    "StructureMismatch",
    "StructuredParams",
    "TlsNotGeneric",
    "TlsProblem",
    "UndefinedConditionNumber",
    "VecPermutation",
    "apply_minv",
    "build_mg",
    "check_spd",
    "entrywise_div",
    "estimate_kappa2_pce",
    "estimate_kappa2_ssce",
    "estimate_kappa_inf_ssce",
    "extract",
    "kappa_2ils",
    "kappa_2ils_cross",
    "kappa_2ils_structured",
    "kappa_2tls",
    "kappa_componentwise",
    "kappa_componentwise_structured",
    "kappa_componentwise_tls",
    "kappa_composed_ils",
    "kappa_inf_structured_general",
    "kappa_lls_svd_check",
    "kappa_mixed",
    "kappa_mixed_structured",
    "kappa_mixed_tls",
    "kappa_structured_tls",
    "kappa_unified",
    "kron_apply",
    "load_problem",
    "make_basis",
    "save_problem",
    "solve_ils",
    "solve_tls",
    "spectral_interval",
    "tls_blocks",
    "tls_jacobian",
    "unvec",
    "vec",
    "vec_perm_apply",
    "wallis",
]

__version__ = "0.1.0"
