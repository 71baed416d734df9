"""Privacy-budget ledger over a sequence of CDP mechanism invocations."""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .composition import compose_cdp
from .mechanisms import CdpBound, DpBound
from .subgaussian import tail_bound


@dataclass(frozen=True)
class LedgerEntry:
    label: str
    bound: CdpBound
    timestamp: str | None = None

    def to_json(self) -> dict:
        return {"label": self.label, "mu": self.bound.mu, "tau": self.bound.tau,
                "timestamp": self.timestamp}


@dataclass(frozen=True)
class Ledger:
    entries: tuple = ()
    running_total: CdpBound = field(default=CdpBound(0.0, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        expected = compose_cdp(e.bound for e in self.entries)
        if self.running_total != expected:
            raise ValueError(
                f"running total {self.running_total} disagrees with composed entries {expected}"
            )

    @classmethod
    def from_entries(cls, entries) -> "Ledger":
        entries = tuple(entries)
        return cls(entries, compose_cdp(e.bound for e in entries))

    def record(self, label: str, bound: CdpBound, timestamp: str | None = None) -> "Ledger":
        return record(self, label, bound, timestamp)

    def to_json(self) -> dict:
        return {"entries": [e.to_json() for e in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "Ledger":
        # totals stored on disk are ignored; they are always recomputed
        entries = [
            LedgerEntry(str(e["label"]), CdpBound(float(e["mu"]), float(e["tau"])), e.get("timestamp"))
            for e in obj.get("entries", [])
        ]
        return cls.from_entries(entries)


def record(ledger: Ledger, label: str, bound: CdpBound, timestamp: str | None = None) -> Ledger:
    """Return a new ledger with one more entry; ``ledger`` is left untouched."""
    return Ledger.from_entries(ledger.entries + (LedgerEntry(label, bound, timestamp),))


def _tail(total: CdpBound, threshold: float) -> float:
    if threshold <= total.mu:
        return 1.0
    if total.tau == 0:
        return 0.0
    return tail_bound(total.tau, (threshold - total.mu) / total.tau)


def exceedance_probability(ledger: Ledger, loss_threshold: float) -> float:
    """Bound on the probability that the cumulative loss reaches ``loss_threshold``."""
    return _tail(ledger.running_total, loss_threshold)


def to_approx_dp(total: CdpBound, delta: float) -> DpBound:
    """Smallest ``eps`` with tail bound at most ``delta``: ``mu + tau sqrt(2 ln(1/delta))``."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    eps = total.mu + total.tau * math.sqrt(2 * -math.log(delta))
    while total.tau > 0 and _tail(total, eps) > delta:
        eps = math.nextafter(eps, math.inf)
    return DpBound(eps, delta)


def load(path: str | os.PathLike) -> Ledger:
    path = Path(path)
    if not path.exists():
        return Ledger()
    with open(path) as f:
        return Ledger.from_json(json.load(f))


def save(ledger: Ledger, path: str | os.PathLike) -> None:
    """Write atomically so concurrent readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(ledger.to_json(), f, indent=2)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
