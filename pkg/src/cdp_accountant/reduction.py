"""From pure DP to CDP: the tight KL bound and the antipodal split.

A pair ``(M, M')`` is antipodal when every per-outcome log-ratio lies in
``{-eps, 0, +eps}``. :func:`antipodalize` turns an arbitrary equal-support
pair into such a pair by splitting the mass of each outcome ``x`` between
``x`` and a fresh outcome ``s_x`` carrying equal mass on both sides. The
split keeps the max divergence and can only increase the KL divergence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    DiscreteDistribution,
    _aligned,
    kl_divergence,
    symmetric_max_divergence,
)
from .mechanisms import CdpBound

RATIO_TOL = 1e-9
MASS_TOL = 1e-12
ALPHA_OVERSHOOT_TOL = 1e-9


def drv_kl_bound(epsilon: float) -> float:
    """Earlier bound ``eps * (e**eps - 1)`` on the KL divergence of an eps-DP pair."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return epsilon * math.expm1(epsilon)


def kl_tight_bound(epsilon: float) -> float:
    """``eps * (e**eps - 1) / 2``: half of :func:`drv_kl_bound`."""
    return drv_kl_bound(epsilon) / 2.0


def dp_to_cdp(epsilon: float) -> CdpBound:
    """An eps-DP mechanism is ``(eps (e**eps - 1)/2, eps)``-CDP."""
    return CdpBound(kl_tight_bound(epsilon), float(epsilon))


@dataclass(frozen=True)
class AntipodalPair:
    m: DiscreteDistribution
    m_prime: DiscreteDistribution
    epsilon: float
    # original outcome -> (original outcome, split outcome)
    split_map: dict = field(default_factory=dict)
    source: tuple | None = None

    @property
    def zero_mass_outcomes(self) -> list:
        """Outcomes kept in the support but carrying no mass on either side."""
        md, mpd = self.m.as_dict(), self.m_prime.as_dict()
        return [o for o in self.m.outcomes if md[o] == 0.0 and mpd.get(o, 0.0) == 0.0]

    def to_json(self) -> dict:
        return {
            "m": self.m.to_json(),
            "m_prime": self.m_prime.to_json(),
            "epsilon": self.epsilon,
            "split_map": [[x, list(pair)] for x, pair in self.split_map.items()],
            "zero_mass_outcomes": self.zero_mass_outcomes,
        }


def _split_label(x, taken: set) -> str:
    label = f"s_{x}"
    while label in taken:
        label = "s_" + label
    return label


def antipodalize(d: DiscreteDistribution, d_prime: DiscreteDistribution) -> AntipodalPair:
    """Split each outcome of ``(d, d_prime)`` into an antipodal pair.

    For each outcome ``x`` with ``p = d_prime[x]`` and ``d[x] = exp(alpha*eps) * p``,
    ``M'[x] = p * (e**(alpha eps) - 1)/(e**(sign eps) - 1)``,
    ``M[x] = e**(sign eps) * M'[x]``, and the remainder of ``p`` goes to the
    split outcome on both sides. ``sign(0)`` is taken as +1; such outcomes
    put all their mass on the split outcome.

    When ``d == d_prime`` (``eps == 0``) the inputs are returned unchanged
    with an empty split map.
    """
    rows = _aligned(d, d_prime)
    eps = max(abs(math.log(a) - math.log(b)) for _, a, b in rows)
    if eps == 0.0:
        return AntipodalPair(d, d_prime, 0.0, {}, (d, d_prime))

    taken = set(d.outcomes) | set(d_prime.outcomes)
    labels, m, mp = [], [], []
    split_labels, split_mass = [], []
    split_map = {}
    for x, dx, px in rows:
        alpha = (math.log(dx) - math.log(px)) / eps
        if abs(alpha) > 1.0 + ALPHA_OVERSHOOT_TOL:
            raise ArithmeticError(f"alpha={alpha} for outcome {x!r} lies outside [-1, 1]")
        alpha = min(1.0, max(-1.0, alpha))
        sign = 1.0 if alpha >= 0 else -1.0
        frac = math.expm1(alpha * eps) / math.expm1(sign * eps)
        frac = min(1.0, max(0.0, frac))
        mpx = px * frac
        mx = math.exp(sign * eps) * mpx
        sx = px * (1.0 - frac)

        s_label = _split_label(x, taken)
        taken.add(s_label)
        labels.append(x)
        m.append(mx)
        mp.append(mpx)
        split_labels.append(s_label)
        split_mass.append(sx)
        split_map[x] = (x, s_label)

    outcomes = tuple(labels) + tuple(split_labels)
    pair_m = DiscreteDistribution(outcomes, tuple(m) + tuple(split_mass))
    pair_mp = DiscreteDistribution(outcomes, tuple(mp) + tuple(split_mass))
    return AntipodalPair(pair_m, pair_mp, eps, split_map, (d, d_prime))


def verify_antipodal(pair: AntipodalPair) -> bool:
    """Check the antipodal invariants at the module tolerances.

    Zero-mass outcomes are ignored for ratio checks.
    """
    eps = pair.epsilon
    md, mpd = pair.m.as_dict(), pair.m_prime.as_dict()
    for o in set(md) | set(mpd):
        a, b = md.get(o, 0.0), mpd.get(o, 0.0)
        if a == 0.0 and b == 0.0:
            continue
        if a == 0.0 or b == 0.0:
            return False
        r = math.log(a) - math.log(b)
        if min(abs(r - eps), abs(r), abs(r + eps)) > RATIO_TOL:
            return False
    for x, (_, sx) in pair.split_map.items():
        if abs(md.get(sx, 0.0) - mpd.get(sx, 0.0)) > MASS_TOL:
            return False
    if pair.source is not None and pair.split_map:
        d, d_prime = pair.source
        for x, (_, sx) in pair.split_map.items():
            if abs(md.get(x, 0.0) + md.get(sx, 0.0) - d[x]) > MASS_TOL:
                return False
            if abs(mpd.get(x, 0.0) + mpd.get(sx, 0.0) - d_prime[x]) > MASS_TOL:
                return False
    return True


def kl_symmetry_gap(pair: AntipodalPair) -> float:
    """``|KL(M||M') - KL(M'||M)|``; zero for antipodal pairs."""
    return abs(kl_divergence(pair.m, pair.m_prime) - kl_divergence(pair.m_prime, pair.m))


def random_pairs(rng: np.random.Generator, count: int, max_epsilon: float = 2.0,
                 min_size: int = 2, max_size: int = 8, batch: int = 4096):
    """Yield ``count`` Dirichlet(1,...,1) pairs with symmetric max divergence <= ``max_epsilon``.

    Support sizes are drawn uniformly from ``[min_size, max_size]``; pairs
    exceeding ``max_epsilon`` are rejected and redrawn at the same size.
    """
    pending: dict[int, list] = {}
    for _ in range(count):
        size = int(rng.integers(min_size, max_size + 1))
        queue = pending.setdefault(size, [])
        while not queue:
            a = rng.dirichlet(np.ones(size), size=batch)
            b = rng.dirichlet(np.ones(size), size=batch)
            with np.errstate(divide="ignore"):
                gap = np.max(np.abs(np.log(a) - np.log(b)), axis=1)
            ok = (gap <= max_epsilon) & (a.min(axis=1) > 0) & (b.min(axis=1) > 0)
            queue.extend(zip(a[ok][::-1], b[ok][::-1]))
        pa, pb = queue.pop()
        # exact normalization so the 1e-12 sum check always holds
        pa, pb = pa / math.fsum(pa), pb / math.fsum(pb)
        yield DiscreteDistribution.from_probs(pa), DiscreteDistribution.from_probs(pb)


def search_extremal_kl(epsilon: float, support_size: int = 3, restarts: int = 16) -> dict:
    """Numerically maximize ``KL(D||D')`` subject to symmetric max divergence <= eps.

    Starting points come from a fixed internal seed so repeated calls agree.
    Reports the best value found against :func:`kl_tight_bound`; nothing is
    claimed about tightness.
    """
    from scipy.optimize import minimize

    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    n = int(support_size)
    if n < 2:
        raise ValueError("support size must be at least 2")

    def unpack(z):
        u, v = z[:n], z[n:]
        lu = u - np.logaddexp.reduce(u)
        lv = v - np.logaddexp.reduce(v)
        return lu, lv

    def neg_kl(z):
        lu, lv = unpack(z)
        return -float(np.sum(np.exp(lu) * (lu - lv)))

    cons = [
        {"type": "ineq", "fun": lambda z: epsilon - (unpack(z)[0] - unpack(z)[1])},
        {"type": "ineq", "fun": lambda z: epsilon + (unpack(z)[0] - unpack(z)[1])},
    ]
    rng = np.random.Generator(np.random.PCG64(0))
    best, best_z = -math.inf, None
    for _ in range(restarts):
        z0 = np.concatenate([rng.normal(size=n), np.zeros(n)])
        z0[n:] = z0[:n] + rng.uniform(-epsilon, epsilon, size=n) * 0.9
        res = minimize(neg_kl, z0, constraints=cons, method="SLSQP",
                       options={"maxiter": 500, "ftol": 1e-14})
        lu, lv = unpack(res.x)
        if np.max(np.abs(lu - lv)) > epsilon + 1e-9:
            continue
        if -res.fun > best:
            best, best_z = -res.fun, res.x
    lu, lv = unpack(best_z)
    bound = kl_tight_bound(epsilon)
    return {
        "epsilon": epsilon,
        "support_size": n,
        "best_kl": best,
        "kl_tight_bound": bound,
        "gap": bound - best,
        "randomized_response_kl": epsilon * math.tanh(epsilon / 2.0),
        "d": np.exp(lu).tolist(),
        "d_prime": np.exp(lv).tolist(),
    }


__all__ = [
    "AntipodalPair",
    "antipodalize",
    "dp_to_cdp",
    "drv_kl_bound",
    "kl_symmetry_gap",
    "kl_tight_bound",
    "random_pairs",
    "search_extremal_kl",
    "symmetric_max_divergence",
    "verify_antipodal",
]
