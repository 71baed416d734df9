"""Concentrated differential privacy accounting."""
from .composition import (
    advanced_composition,
    basic_composition,
    compose_cdp,
    convolve_loss_rvs,
)
from .distributions import (
    DiscreteDistribution,
    HeuristicDivergenceWarning,
    PrivacyLossRV,
    SupportMismatch,
    approx_max_divergence,
    empirical_subgaussian_standard,
    kl_divergence,
    max_divergence,
    privacy_loss_rv,
    symmetric_max_divergence,
)
from .group_privacy import (
    ALPHA,
    GroupBoundResult,
    GroupPreconditionError,
    group_cdp_recursion,
    group_mu_closed_form,
    group_mu_step,
    group_tau_closed_form,
    group_tau_step,
    pairwise_kl_bound,
    pairwise_tau_bound,
)
from .ledger import Ledger, exceedance_probability, record, to_approx_dp
from .mechanisms import (
    CdpBound,
    DpBound,
    GaussianMechanismSpec,
    calibrate_gaussian_for_cdp,
    calibrate_gaussian_for_dp,
    gaussian_cdp,
    gaussian_group_cdp,
    gaussian_loss_params,
    laplace_epsilon,
    randomized_response_pair,
    sample_gaussian_loss,
)
from .reduction import (
    AntipodalPair,
    antipodalize,
    dp_to_cdp,
    drv_kl_bound,
    kl_symmetry_gap,
    kl_tight_bound,
    verify_antipodal,
)
from .subgaussian import (
    DEFAULT_LAMBDA_GRID,
    SubgaussianCertificate,
    hoeffding_standard,
    moment_bound,
    product_exp_bound,
    sum_standard,
    tail_bound,
    verify_certificate,
)

__version__ = "0.1.0"
