"""Gaussian mechanism characterization, calibration and reference mechanisms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DiscreteDistribution

GENERATOR = "numpy.random.PCG64"


@dataclass(frozen=True)
class CdpBound:
    """``(mu, tau)``: mean bound and subgaussian standard of the privacy loss."""

    mu: float
    tau: float

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be a finite non-negative number, got {self.mu}")
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be a finite non-negative number, got {self.tau}")

    def dominated_by(self, other: "CdpBound") -> bool:
        return self.mu <= other.mu and self.tau <= other.tau

    def to_json(self) -> dict:
        return {"mu": self.mu, "tau": self.tau}


@dataclass(frozen=True)
class DpBound:
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta}


@dataclass(frozen=True)
class GaussianMechanismSpec:
    sensitivity: float
    sigma: float

    def __post_init__(self):
        if not self.sensitivity >= 0:
            raise ValueError(f"sensitivity must be non-negative, got {self.sensitivity}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def tau(self) -> float:
        return self.sensitivity / self.sigma

    @classmethod
    def from_json(cls, obj: dict) -> "GaussianMechanismSpec":
        kind = obj.get("kind")
        if kind != "gaussian":
            raise ValueError(f"unsupported mechanism kind {kind!r}")
        return cls(float(obj["sensitivity"]), float(obj["sigma"]))

    def to_json(self) -> dict:
        return {"kind": "gaussian", "sensitivity": self.sensitivity, "sigma": self.sigma}


def gaussian_cdp(spec: GaussianMechanismSpec) -> CdpBound:
    """The Gaussian mechanism is ``(tau**2/2, tau)``-CDP with ``tau = sensitivity/sigma``."""
    tau = spec.tau
    return CdpBound(tau * tau / 2.0, tau)


def gaussian_loss_params(spec: GaussianMechanismSpec) -> tuple[float, float]:
    """Mean and standard deviation of the (exactly Gaussian) privacy loss."""
    tau = spec.tau
    return tau * tau / 2.0, tau


def sample_gaussian_loss(spec: GaussianMechanismSpec, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` privacy-loss samples; deterministic in ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(n) * spec.sigma
    tau = spec.tau
    return tau * (x / spec.sigma) + tau * tau / 2.0


def calibrate_gaussian_for_cdp(sensitivity: float, target: CdpBound) -> float:
    """Smallest sigma whose Gaussian mechanism meets ``target`` in both components."""
    if sensitivity < 0:
        raise ValueError("sensitivity must be non-negative")
    if sensitivity == 0:
        return 1.0
    tau = min(target.tau, math.sqrt(2.0 * target.mu))
    if tau <= 0:
        raise ValueError(
            f"target {target} forces zero privacy loss; no finite sigma achieves it"
        )
    sigma = sensitivity / tau
    # guard against the division rounding the achieved bound past the target
    while not gaussian_cdp(GaussianMechanismSpec(sensitivity, sigma)).dominated_by(target):
        sigma = math.nextafter(sigma, math.inf)
    return sigma


def calibrate_gaussian_for_dp(sensitivity: float, bound: DpBound) -> float:
    """Classic baseline ``sigma = sensitivity * sqrt(2 ln(1/delta)) / epsilon``."""
    if sensitivity < 0:
        raise ValueError("sensitivity must be non-negative")
    if not bound.epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < bound.delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if sensitivity == 0:
        return 1.0
    return sensitivity * math.sqrt(2.0 * math.log(1.0 / bound.delta)) / bound.epsilon


def gaussian_group_cdp(spec: GaussianMechanismSpec, s: int) -> CdpBound:
    """Exact bound for groups of ``s`` rows.

    The group sensitivity is ``s * sensitivity``, so the standard is
    ``s * sensitivity / sigma`` (note the division by sigma).
    """
    if int(s) != s or s < 1:
        raise ValueError(f"group size must be a positive integer, got {s}")
    return gaussian_cdp(GaussianMechanismSpec(s * spec.sensitivity, spec.sigma))


def randomized_response_pair(epsilon: float) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """Binary randomized response on adjacent inputs, ``epsilon``-DP both ways."""
    if not epsilon > 0:
        raise ValueError("randomized response needs epsilon > 0")
    hi = 1.0 / (1.0 + math.exp(-epsilon))
    lo = 1.0 / (1.0 + math.exp(epsilon))
    p = DiscreteDistribution((0, 1), (hi, lo))
    q = DiscreteDistribution((0, 1), (lo, hi))
    return p, q


def laplace_epsilon(sensitivity: float, b: float) -> float:
    """Pure-DP parameter of Laplace noise with scale ``b``."""
    if not b > 0:
        raise ValueError(f"Laplace scale must be positive, got {b}")
    if sensitivity < 0:
        raise ValueError("sensitivity must be non-negative")
    return sensitivity / b
