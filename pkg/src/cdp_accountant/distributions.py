"""Discrete distributions, divergences and privacy-loss random variables.

All logarithms are natural. Log-ratios are formed as ``log(p) - log(q)``
so that tiny probabilities never underflow a quotient.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

NORMALIZATION_TOL = 1e-12
EXACT_SUBSET_LIMIT = 20
# log(sys.float_info.max); exponents past this cannot be represented.
EXP_LIMIT = 709.78


class SupportMismatch(ValueError):
    """Raised when a divergence is undefined because supports differ."""

    def __init__(self, outcome, zero_side: str, message: str | None = None):
        self.outcome = outcome
        self.zero_side = zero_side
        if message is None:
            message = f"outcome {outcome!r} has zero mass under {zero_side} only"
        super().__init__(message)


class HeuristicDivergenceWarning(UserWarning):
    """The delta-approximate max divergence was computed greedily."""


@dataclass(frozen=True)
class DiscreteDistribution:
    outcomes: tuple
    probs: tuple

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)
        if len(outcomes) != len(probs):
            raise ValueError("outcomes and probs must have the same length")
        if not outcomes:
            raise ValueError("distribution needs at least one outcome")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("outcome labels must be unique")
        for o, p in zip(outcomes, probs):
            if not (p >= 0.0) or p > 1.0:
                raise ValueError(f"probability of {o!r} is outside [0, 1]: {p}")
        total = math.fsum(probs)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_probs(cls, probs: Iterable[float], outcomes: Sequence[Hashable] | None = None):
        probs = tuple(float(p) for p in probs)
        if outcomes is None:
            outcomes = range(len(probs))
        return cls(tuple(outcomes), probs)

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteDistribution":
        return cls(tuple(obj["outcomes"]), tuple(obj["probs"]))

    def to_json(self) -> dict:
        return {"outcomes": list(self.outcomes), "probs": list(self.probs)}

    def __getitem__(self, outcome) -> float:
        return self.as_dict().get(outcome, 0.0)

    def __len__(self) -> int:
        return len(self.outcomes)

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs))

    @property
    def support(self) -> frozenset:
        return frozenset(o for o, p in zip(self.outcomes, self.probs) if p > 0.0)


def _aligned(p: DiscreteDistribution, q: DiscreteDistribution):
    """Return ``(outcome, p[x], q[x])`` over the common support.

    Outcomes with zero mass on both sides are dropped.
    """
    qd = q.as_dict()
    rows = []
    for o, pi in zip(p.outcomes, p.probs):
        qi = qd.pop(o, 0.0)
        if pi == 0.0 and qi == 0.0:
            continue
        if qi == 0.0:
            raise SupportMismatch(o, "q")
        if pi == 0.0:
            raise SupportMismatch(o, "p")
        rows.append((o, pi, qi))
    for o, qi in qd.items():
        if qi > 0.0:
            raise SupportMismatch(o, "p")
    return rows


def kl_divergence(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """KL divergence ``sum p[x] ln(p[x]/q[x])`` in nats."""
    rows = _aligned(p, q)
    return math.fsum(pi * (math.log(pi) - math.log(qi)) for _, pi, qi in rows)


def max_divergence(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Max divergence, attained on a single outcome.

    ``p(S)/q(S)`` is a mediant of the atom ratios in ``S`` and so never
    exceeds the largest of them.
    """
    rows = _aligned(p, q)
    return max(math.log(pi) - math.log(qi) for _, pi, qi in rows)


def symmetric_max_divergence(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Larger of the two directed max divergences."""
    rows = _aligned(p, q)
    return max(abs(math.log(pi) - math.log(qi)) for _, pi, qi in rows)


def approx_max_divergence(p: DiscreteDistribution, q: DiscreteDistribution, delta: float) -> float:
    """Max of ``ln(p(S)/q(S))`` over events ``S`` with ``p(S) >= delta``.

    Outcomes outside q's support may carry at most ``delta`` of p's mass
    (exact equality is accepted) and are excluded from the candidate events.
    Supports up to 20 outcomes are searched exhaustively; larger ones use a
    ratio-sorted prefix search and emit :class:`HeuristicDivergenceWarning`.
    Returns ``-inf`` when no event reaches mass ``delta``.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    qd = q.as_dict()
    escaped = math.fsum(pi for o, pi in zip(p.outcomes, p.probs) if pi > 0 and qd.get(o, 0.0) == 0.0)
    if escaped > delta:
        bad = next(o for o, pi in zip(p.outcomes, p.probs) if pi > 0 and qd.get(o, 0.0) == 0.0)
        raise SupportMismatch(
            bad, "q", f"p places mass {escaped} outside q's support, more than delta={delta}"
        )
    pd = p.as_dict()
    atoms = [(pd.get(o, 0.0), qi) for o, qi in qd.items() if qi > 0.0]

    best = -math.inf
    if len(atoms) <= EXACT_SUBSET_LIMIT:
        for r in range(1, len(atoms) + 1):
            for subset in itertools.combinations(atoms, r):
                ps = math.fsum(a for a, _ in subset)
                if ps < delta or ps == 0.0:
                    continue
                qs = math.fsum(b for _, b in subset)
                best = max(best, math.log(ps) - math.log(qs))
        return best

    warnings.warn(
        f"support of {len(atoms)} outcomes exceeds {EXACT_SUBSET_LIMIT}; "
        "delta-approximate max divergence is a greedy lower estimate",
        HeuristicDivergenceWarning,
        stacklevel=2,
    )
    atoms.sort(key=lambda a: a[0] / a[1], reverse=True)
    ps = qs = 0.0
    for a, b in atoms:
        ps += a
        qs += b
        if ps >= delta and ps > 0.0:
            best = max(best, math.log(ps) - math.log(qs))
    return best


def merge_atoms(pairs: Iterable[tuple[float, float]], tol: float = 0.0) -> tuple:
    """Sort atoms by loss and merge neighbours whose losses are within ``tol``.

    A merged atom sits at the probability-weighted mean of its members, so
    the overall mean is unchanged.
    """
    items = sorted((float(l), float(w)) for l, w in pairs if w > 0.0)
    merged: list[list[float]] = []
    anchor = None
    for loss, w in items:
        if merged and loss - anchor <= tol:
            merged[-1][0] += loss * w
            merged[-1][1] += w
        else:
            anchor = loss
            merged.append([loss * w, w])
    out = []
    for lw, w in merged:
        out.append((lw / w, w))
    return tuple(out)


@dataclass(frozen=True)
class PrivacyLossRV:
    """Finite random variable given by ``(loss, prob)`` atoms."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(l), float(w)) for l, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("a privacy loss random variable needs at least one atom")
        if any(not math.isfinite(l) for l, _ in atoms):
            raise ValueError("loss values must be finite")
        if any(w < 0.0 for _, w in atoms):
            raise ValueError("atom probabilities must be non-negative")
        total = math.fsum(w for _, w in atoms)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"atom probabilities sum to {total!r}, not 1")

    @property
    def losses(self) -> np.ndarray:
        return np.array([l for l, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def mean(self) -> float:
        return math.fsum(l * w for l, w in self.atoms)

    def variance(self) -> float:
        m = self.mean()
        return math.fsum(w * (l - m) ** 2 for l, w in self.atoms)

    def moment(self, k: int) -> float:
        return math.fsum(w * l**k for l, w in self.atoms)

    def centered(self) -> "PrivacyLossRV":
        m = self.mean()
        return PrivacyLossRV(tuple((l - m, w) for l, w in self.atoms))

    def log_mgf(self, lam: float) -> float:
        """``ln E[exp(lam * X)]`` evaluated in log-space."""
        exps = []
        logs = []
        for l, w in self.atoms:
            if w == 0.0:
                continue
            e = lam * l
            if not math.isfinite(e) or abs(e) > EXP_LIMIT:
                raise OverflowError(f"lambda*loss = {e!r} exceeds the exponent range")
            exps.append(e)
            logs.append(math.log(w))
        top = max(exps)
        return top + math.log(math.fsum(math.exp(e - top + lw) for e, lw in zip(exps, logs)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["loss", "prob"])
        for l, w in self.atoms:
            writer.writerow([repr(l), repr(w)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PrivacyLossRV":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != ["loss", "prob"]:
            raise ValueError(f"expected header 'loss,prob', got {reader.fieldnames}")
        return cls(tuple((float(r["loss"]), float(r["prob"])) for r in reader))


def privacy_loss_rv(p: DiscreteDistribution, q: DiscreteDistribution) -> PrivacyLossRV:
    """Loss ``ln(p[x]/q[x])`` with ``x`` drawn from ``p``; equal losses merged."""
    rows = _aligned(p, q)
    return PrivacyLossRV(merge_atoms(((math.log(pi) - math.log(qi), pi) for _, pi, qi in rows)))


def empirical_subgaussian_standard(rv: PrivacyLossRV, lambda_grid: Sequence[float]) -> float:
    """Grid estimate of the subgaussian standard of the centered ``rv``.

    Returns the supremum of ``sqrt(2 ln E[exp(lam X)] / lam**2)`` over the
    grid. This is a lower bound on the true standard.
    """
    grid = list(lambda_grid)
    if not grid:
        raise ValueError("lambda grid must be nonempty")
    if any(lam == 0 for lam in grid):
        raise ValueError("lambda grid must not contain 0")
    centered = rv.centered()
    best = 0.0
    for lam in grid:
        c = centered.log_mgf(lam)
        best = max(best, math.sqrt(max(2.0 * c / lam**2, 0.0)))
    return best
