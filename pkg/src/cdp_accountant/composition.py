"""Composition of CDP bounds, advanced composition, and a convolution oracle."""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .distributions import PrivacyLossRV, merge_atoms
from .mechanisms import CdpBound, DpBound

MERGE_TOL = 1e-12
MAX_ATOMS = 10**6


def compose_cdp(bounds: Iterable[CdpBound]) -> CdpBound:
    """Means add; standards add in quadrature.

    ``k`` identical bounds compose to exactly ``(k mu, sqrt(k) tau)``.
    """
    bounds = list(bounds)
    if not bounds:
        return CdpBound(0.0, 0.0)
    mu = math.fsum(b.mu for b in bounds)
    taus = {b.tau for b in bounds}
    if len(taus) == 1:
        tau = math.sqrt(len(bounds)) * bounds[0].tau
    else:
        tau = math.sqrt(math.fsum(b.tau * b.tau for b in bounds))
    return CdpBound(mu, tau)


def advanced_composition(k: int, epsilon: float, delta_prime: float, delta: float) -> DpBound:
    """k-fold composition of (eps, delta')-DP mechanisms.

    Returns ``(sqrt(2k ln(1/delta)) eps + k eps (e**eps - 1)/2, k delta' + delta)``.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not 0 <= delta_prime < 1:
        raise ValueError("delta_prime must lie in [0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    eps = math.sqrt(2 * k * -math.log(delta)) * epsilon + k * epsilon * math.expm1(epsilon) / 2
    total_delta = k * delta_prime + delta
    if total_delta >= 1:
        raise ValueError(f"composed delta {total_delta} is not below 1")
    return DpBound(eps, total_delta)


def basic_composition(k: int, epsilon: float) -> DpBound:
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return DpBound(k * epsilon, 0.0)


def convolve_loss_rvs(rvs: Sequence[PrivacyLossRV]) -> PrivacyLossRV:
    """Loss of the independent (non-adaptive) product of the given losses.

    Losses within ``MERGE_TOL`` of each other are merged after every step.
    """
    rvs = list(rvs)
    if not rvs:
        return PrivacyLossRV(((0.0, 1.0),))
    if len(rvs) == 1:
        return rvs[0]
    losses, probs = rvs[0].losses, rvs[0].probs
    for rv in rvs[1:]:
        size = losses.size * len(rv.atoms)
        if size > MAX_ATOMS:
            raise ValueError(f"convolution would produce {size} atoms (limit {MAX_ATOMS})")
        l2 = np.add.outer(losses, rv.losses).ravel()
        p2 = np.multiply.outer(probs, rv.probs).ravel()
        merged = merge_atoms(zip(l2.tolist(), p2.tolist()), MERGE_TOL)
        losses = np.array([l for l, _ in merged])
        probs = np.array([w for _, w in merged])
    # renormalize away accumulated rounding in the products
    probs = probs / math.fsum(probs.tolist())
    return PrivacyLossRV(tuple(zip(losses.tolist(), probs.tolist())))
