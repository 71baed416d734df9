"""Closed-form subgaussian facts and grid certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .distributions import PrivacyLossRV

DEFAULT_LAMBDA_GRID = tuple(
    sign * 2**i / 8 for i in range(10) for sign in (1.0, -1.0)
)
CERTIFICATE_TOL = 1e-9
MAX_MOMENT_ORDER = 20


def tail_bound(tau: float, t: float) -> float:
    """Bound ``exp(-t**2/2)`` on ``Pr[X >= t*tau]`` for tau-subgaussian ``X``."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return math.exp(-t * t / 2.0)


def hoeffding_standard(a: float, b: float) -> float:
    """Standard of any zero-mean variable supported on ``[a, b]``."""
    if a > b:
        raise ValueError(f"empty interval [{a}, {b}]")
    return (b - a) / 2.0


def moment_bound(tau: float, k: int) -> float:
    """Upper bound on the k-th moment of a tau-subgaussian variable."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if k > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order above {MAX_MOMENT_ORDER} is not supported")
    h = -(-int(k) // 2)
    return math.factorial(h) * 2 ** (h + 1) * tau**k


def sum_standard(taus: Sequence[float]) -> float:
    """Standard of a sum of (conditionally) subgaussian variables."""
    taus = list(taus)
    if any(t < 0 for t in taus):
        raise ValueError("standards must be non-negative")
    return math.sqrt(math.fsum(t * t for t in taus))


def product_exp_bound(mean_x: float, second_moment_x: float, tau: float) -> float:
    """Bound on ``E[X exp(Y)]`` when ``Y`` is centered and tau-subgaussian, tau <= 1/3."""
    if not 0 < tau <= 1 / 3:
        raise ValueError(f"tau must lie in (0, 1/3], got {tau}")
    if second_moment_x < mean_x * mean_x * (1 - 1e-12):
        raise ValueError("second moment cannot be below the squared mean")
    return mean_x + math.sqrt(second_moment_x) * (tau + 3 * tau * tau)


@dataclass(frozen=True)
class SubgaussianCertificate:
    tau: float
    lambda_grid: tuple
    max_violation: float
    worst_lambda: float | None = field(default=None)

    @property
    def passed(self) -> bool:
        return self.max_violation <= CERTIFICATE_TOL

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "lambda_grid": list(self.lambda_grid),
            "max_violation": self.max_violation,
            "worst_lambda": self.worst_lambda,
            "passed": self.passed,
        }


def verify_certificate(
    rv: PrivacyLossRV, tau: float, grid: Sequence[float] = DEFAULT_LAMBDA_GRID
) -> SubgaussianCertificate:
    """Check ``ln E[exp(lam (X - E X))] <= lam**2 tau**2 / 2`` across ``grid``."""
    grid = tuple(grid)
    if not grid:
        raise ValueError("lambda grid must be nonempty")
    centered = rv.centered()
    worst = -math.inf
    worst_lam = None
    for lam in grid:
        v = centered.log_mgf(lam) - lam * lam * tau * tau / 2.0
        if v > worst:
            worst, worst_lam = v, lam
    return SubgaussianCertificate(tau, grid, worst, worst_lam)
