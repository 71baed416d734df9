"""Group privacy for arbitrary CDP mechanisms.

Bounds for groups of ``s = 2**m`` rows are obtained by doubling: a pair
of databases differing on ``2**(m+1)`` rows is bridged by a midpoint
database, and the pairwise lemmas bound the loss across the bridge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .mechanisms import CdpBound

ALPHA = 2 * 34**4.5
# the closed forms are proven under tau * s * log2(s)**3 * 34**3 <= 1/2
SMALLNESS_LIMIT = 0.5
PAIRWISE_KL_TAU_LIMIT = 1 / 3
PAIRWISE_TAU_LIMIT = 1 / 4
# slack on mu <= tau^2/2 for bounds that meet it only up to rounding
INVARIANT_RTOL = 1e-12


class GroupPreconditionError(ValueError):
    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(message)


@dataclass(frozen=True)
class GroupBoundResult:
    s: int
    effective_s: int
    bound: CdpBound
    method: str
    steps: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    inflated: bool = False

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "effective_s": self.effective_s,
            "method": self.method,
            "mu": self.bound.mu,
            "tau": self.bound.tau,
            "inflated": self.inflated,
            "steps": [{"m": i, "mu": b.mu, "tau": b.tau} for i, b in enumerate(self.steps)],
            "warnings": list(self.warnings),
        }


def next_power_of_two(s: int) -> int:
    if int(s) != s or s < 1:
        raise ValueError(f"group size must be a positive integer, got {s}")
    return 1 << (int(s) - 1).bit_length()


def smallness(tau: float, s: int) -> float:
    """``tau * s * log2(s)**3 * 34**3``; must be at most 1/2 for the closed forms."""
    m = math.log2(s)
    return tau * s * m**3 * 34**3


def group_tau_step(tau_m: float) -> float:
    if tau_m < 0:
        raise ValueError("tau must be non-negative")
    return 2 * tau_m + 34 * tau_m**1.5


def group_mu_step(mu_m: float, tau_m: float) -> float:
    if mu_m < 0 or tau_m < 0:
        raise ValueError("mu and tau must be non-negative")
    if mu_m > tau_m * tau_m / 2 * (1 + INVARIANT_RTOL):
        raise GroupPreconditionError(
            "mu<=tau^2/2", f"mu={mu_m} exceeds tau^2/2={tau_m * tau_m / 2}"
        )
    return 2 * mu_m + tau_m**2 + 3.5 * tau_m**3 + 1.5 * tau_m**4


def _inflate(bound: CdpBound) -> CdpBound:
    tau = math.sqrt(2 * bound.mu)
    while tau * tau / 2 < bound.mu:
        tau = math.nextafter(tau, math.inf)
    return CdpBound(bound.mu, max(tau, bound.tau))


def _prepare(bound: CdpBound, s: int, inflate: bool):
    effective = next_power_of_two(s)
    notes = []
    if effective != s:
        notes.append(f"group size {s} rounded up to power of two {effective}")
    inflated = False
    if bound.mu > bound.tau * bound.tau / 2 * (1 + INVARIANT_RTOL):
        if not inflate:
            raise GroupPreconditionError(
                "mu<=tau^2/2",
                f"mu={bound.mu} exceeds tau^2/2={bound.tau ** 2 / 2}; "
                "pass inflate=True to raise tau to sqrt(2 mu)",
            )
        bound = _inflate(bound)
        inflated = True
        notes.append(f"tau inflated to {bound.tau} so that mu <= tau^2/2")
    return bound, effective, notes, inflated


def group_cdp_recursion(bound: CdpBound, s: int, inflate: bool = False) -> GroupBoundResult:
    """Iterate the doubling recursion ``log2(s)`` times from ``bound``.

    Each level requires the current standard to be at most 1/4 (the
    hypothesis of the pairwise standard bound); a violation raises
    :class:`GroupPreconditionError` naming the level. The global smallness
    condition needed only by the closed forms is reported as a warning.
    """
    bound, effective, notes, inflated = _prepare(bound, s, inflate)
    if effective > 1 and smallness(bound.tau, effective) > SMALLNESS_LIMIT:
        notes.append(
            f"tau*s*log2(s)^3*34^3 = {smallness(bound.tau, effective):.6g} exceeds 1/2; "
            "closed-form bounds do not apply"
        )
    steps = [bound]
    mu, tau = bound.mu, bound.tau
    for level in range(effective.bit_length() - 1):
        if tau > PAIRWISE_TAU_LIMIT:
            raise GroupPreconditionError(
                "tau<=1/4", f"tau_{level}={tau} exceeds 1/4; the doubling step is not valid"
            )
        mu, tau = group_mu_step(mu, tau), group_tau_step(tau)
        steps.append(CdpBound(mu, tau))
    return GroupBoundResult(int(s), effective, steps[-1], "recursion", steps, notes, inflated)


def _check_closed_form(tau: float, s: int) -> int:
    if int(s) != s or s < 1 or s & (s - 1):
        raise ValueError(f"closed forms need s to be a power of two, got {s}")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if smallness(tau, s) > SMALLNESS_LIMIT:
        raise GroupPreconditionError(
            "smallness", f"tau*s*log2(s)^3*34^3 = {smallness(tau, s):.6g} exceeds 1/2"
        )
    return int(s).bit_length() - 1


def group_tau_closed_form(tau: float, s: int) -> float:
    """``s tau + ALPHA (s log2(s)**3 tau)**1.5``."""
    m = _check_closed_form(tau, s)
    return s * tau + ALPHA * (s * m**3 * tau) ** 1.5


def group_mu_closed_form(tau: float, s: int) -> float:
    """``(s tau)**2 / 2 + ALPHA (s tau)**2.5 log2(s)**4.5``."""
    m = _check_closed_form(tau, s)
    return (s * tau) ** 2 / 2 + ALPHA * (s * tau) ** 2.5 * m**4.5


def group_cdp_closed_form(bound: CdpBound, s: int, inflate: bool = False) -> GroupBoundResult:
    bound, effective, notes, inflated = _prepare(bound, s, inflate)
    result = CdpBound(
        group_mu_closed_form(bound.tau, effective), group_tau_closed_form(bound.tau, effective)
    )
    return GroupBoundResult(int(s), effective, result, "closed-form", [bound], notes, inflated)


def group_cdp_exact_gaussian(bound: CdpBound, s: int) -> GroupBoundResult:
    """Exact group bound when ``bound`` comes from a Gaussian mechanism."""
    if int(s) != s or s < 1:
        raise ValueError(f"group size must be a positive integer, got {s}")
    tau = s * bound.tau
    return GroupBoundResult(int(s), int(s), CdpBound(tau * tau / 2, tau), "exact-gaussian", [bound])


def group_bound(bound: CdpBound, s: int, method: str = "recursion", inflate: bool = False):
    if method == "recursion":
        return group_cdp_recursion(bound, s, inflate)
    if method == "closed-form":
        return group_cdp_closed_form(bound, s, inflate)
    if method == "exact-gaussian":
        return group_cdp_exact_gaussian(bound, s)
    raise ValueError(f"unknown method {method!r}")


def pairwise_kl_bound(mu1: float, tau1: float, mu2: float, tau2: float) -> float:
    """KL bound across a midpoint: ``(mu1, tau1)`` on one side, ``(mu2, tau2)`` on the other.

    The cubic cross term uses coefficient 3 (``3 tau1**2 tau2``).
    """
    if tau1 > PAIRWISE_KL_TAU_LIMIT:
        raise ValueError(f"tau1 must be at most 1/3, got {tau1}")
    return mu1 + mu2 + tau1 * tau2 + 3 * tau1**2 * tau2 + (tau1 + 3 * tau1**2) * mu2


def pairwise_tau_bound(tau: float) -> float:
    if tau > PAIRWISE_TAU_LIMIT:
        raise ValueError(f"tau must be at most 1/4, got {tau}")
    return group_tau_step(tau)
