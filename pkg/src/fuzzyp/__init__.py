"""Exact test functions, randomized/mid/natural/fuzzy p-values and their
multiplicity-adjusted versions for discrete test statistics."""

from .dist_core import (
    DiscreteNullDistribution,
    TwoSampleInput,
    binomial_null,
    fold_absolute,
    folded_mann_whitney_null,
    mann_whitney_null,
    mass,
    survival,
)
from .errors import DomainError, InputError
from .mc_engine import (
    McConfig,
    empirical_adjusted_p,
    estimate_mtf,
    run_multi_method,
    total_bias,
    u_matrix,
)
from .mtp import (
    MtpProcedure,
    adjust,
    adjust_by_inf_oracle,
    apply_mtp,
    bonferroni_adjust,
    evaluate_decisions,
    holm_adjust,
    holm_reject_count,
    storey_adjust,
    storey_m0_hat,
    tarone_adjust,
    tarone_eligible,
)
from .policy import UPolicy, u_star
from .single_test import (
    critical_pair,
    decide,
    fixed_u_size,
    fuzzy_interval,
    p_star,
    phi_star,
    single_method_report,
    two_sided_p,
)

__version__ = "0.1.0"
