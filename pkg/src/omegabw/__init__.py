"""Commutator bounds in weighted Frobenius norms, with numerical oracles."""

__version__ = "0.1.0"

from .bounds import (
    BoundKind,
    BoundReport,
    VerificationError,
    loose_constant,
    n2_identity_residual,
    ratio,
    report,
    tight_constant,
    verify_appendix_B_commuting,
    verify_appendix_B_rank_one,
    verify_appendix_normal,
    witness_pair,
)
from .ensembles import SeededStream, ginibre, omega_sweep, random_gkls, random_weight, sweep_grid
from .linalg import Weight, center_omega, center_trace, commutator, frobenius_norm, omega_inner, omega_norm
from .optimize import (
    RatioResult,
    alternate_maximize,
    best_response,
    commutator_superop,
    global_estimate,
    quadratic_form_pair,
    unvectorize,
    vectorize,
    weight_gram,
)
from .quantum import (
    DensityMatrix,
    GKLSModel,
    RateSpectrum,
    loose_uncertainty_bound,
    new_uncertainty_bound,
    qubit_mixture,
    rate_constraint_check,
    rate_formula,
    rate_spectrum,
    robertson_bound,
    stationary_state,
    sum_rule_check,
    variance,
)
