"""Multifractal analysis of biased Bernoulli convolutions."""

from .errors import (
    BcmfError,
    DomainError,
    FiniteExpansionAmbiguous,
    NonConvergence,
    PreconditionError,
    RangeError,
)
from .expansions import (
    EPSequence,
    Params,
    Status,
    beta_digits,
    digit_freq,
    freq_words,
    gap_distance,
    greedy_one,
    membership_U,
    multinacci_words,
    pi,
    r_lambda,
    solve_constant,
)
from .measure import (
    Enclosure,
    Interval,
    cylinder_ball_bounds,
    local_dim_estimate,
    mesh_profile,
    nu_ball,
    nu_enclosure,
    sample_point,
)
from .spectrum import (
    coarse_spectrum,
    eta_k,
    holder_bound,
    lambda_k_max,
    lower_bound_curve,
    osc_spectrum_point,
    spectrum_curve,
    typical_dim,
    typical_dim_mc,
    upper_bound_curve,
)

__version__ = "0.1.0"

__all__ = [
    "BcmfError",
    "DomainError",
    "EPSequence",
    "Enclosure",
    "FiniteExpansionAmbiguous",
    "Interval",
    "NonConvergence",
    "Params",
    "PreconditionError",
    "RangeError",
    "Status",
    "beta_digits",
    "coarse_spectrum",
    "cylinder_ball_bounds",
    "digit_freq",
    "eta_k",
    "freq_words",
    "gap_distance",
    "greedy_one",
    "holder_bound",
    "lambda_k_max",
    "local_dim_estimate",
    "lower_bound_curve",
    "membership_U",
    "mesh_profile",
    "multinacci_words",
    "nu_ball",
    "nu_enclosure",
    "osc_spectrum_point",
    "pi",
    "r_lambda",
    "sample_point",
    "solve_constant",
    "spectrum_curve",
    "typical_dim",
    "typical_dim_mc",
    "upper_bound_curve",
]
