"""Prime sieving and prime-counting queries.

A :class:`PrimeTable` is built once with a segmented sieve of Eratosthenes and
then shared read-only by every estimator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange

SEGMENT = 1 << 20


def _small_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def _segmented_sieve(bound: int) -> np.ndarray:
    root = max(math.isqrt(bound), 2)
    base = _small_primes(root)
    chunks = [base[base <= bound]]
    lo = root + 1
    while lo <= bound:
        hi = min(lo + SEGMENT, bound + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            seg[start - lo::p] = False
        chunks.append(np.flatnonzero(seg) + lo)
        lo = hi
    return np.concatenate(chunks).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Ascending primes up to ``bound`` with pi(t) lookups."""

    bound: int
    primes: np.ndarray
    _logs: dict = field(default_factory=dict, repr=False, compare=False)

    def pi(self, t: float) -> int:
        if t > self.bound:
            raise OutOfRange(f"pi({t}) requested but table only sieved to {self.bound}")
        if t < 2:
            return 0
        return int(np.searchsorted(self.primes, math.floor(t), side="right"))

    def upto(self, y: float) -> np.ndarray:
        """View of the primes <= y."""
        return self.primes[: self.pi(y)]

    def log_primes(self, y: float) -> np.ndarray:
        """Natural logs of the primes <= y (float64, cached per table)."""
        logs = self._logs.get("f8")
        if logs is None:
            logs = np.log(self.primes.astype(np.float64))
            logs.setflags(write=False)
            self._logs["f8"] = logs
        return logs[: self.pi(y)]

    def log_powers(self, y: float) -> np.ndarray:
        """Rows 1, log p, (log p)^2 for the primes <= y (cached per table)."""
        powers = self._logs.get("powers")
        if powers is None:
            logs = self.log_primes(self.bound)
            powers = np.vstack([np.ones_like(logs), logs, logs * logs])
            powers.setflags(write=False)
            self._logs["powers"] = powers
        return powers[:, : self.pi(y)]

    def __len__(self) -> int:
        return len(self.primes)


def build(bound: int) -> PrimeTable:
    """Sieve all primes <= bound."""
    if int(bound) != bound or bound < 2:
        raise ValueError(f"prime bound must be an integer >= 2, got {bound!r}")
    bound = int(bound)
    primes = _segmented_sieve(bound)
    primes.setflags(write=False)
    return PrimeTable(bound=bound, primes=primes)


def pi(table: PrimeTable, t: float) -> int:
    return table.pi(t)


_cache: dict[int, PrimeTable] = {}


def table_for(bound: int) -> PrimeTable:
    """Return a cached table covering at least ``bound``."""
    bound = max(int(bound), 2)
    for b, tab in _cache.items():
        if b >= bound:
            return tab
    tab = build(max(bound, 1 << 16))
    _cache.clear()
    _cache[tab.bound] = tab
    return tab
