"""Which estimator to run for a given (x, y).

The policy walks a fixed sequence of regions:

1. ``buchstab`` when a cheap magnitude probe says Psi(x, y) is within the
   exact-count budget;
2. ``dickman`` once y >= (log x)^dickman_exponent;
3. ``ennola`` when y <= (log x)^ennola_proven_exponent, or y <= ennola_y_cap
   and a coefficient table covering y is at hand;
4. ``htalpha`` up to ht_to_htfast_y;
5. ``htfast`` beyond.

Every boundary is a policy field and can be loaded from a ``key = value`` file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln

from . import dickman
from .primes import table_for

METHODS = ("buchstab", "dickman", "ennola", "htalpha", "htfast")
# the probe's lattice bound only looks at primes up to here
PROBE_PRIME_LIMIT = 1 << 16


@dataclass(frozen=True)
class SelectorPolicy:
    buchstab_work_budget: int = 10**7
    ennola_proven_exponent: float = 0.75
    ennola_y_cap: int = 1 << 16
    ht_to_htfast_y: int = 1 << 18
    dickman_exponent: float = 2.5
    overrides: Optional[str] = None

    def __post_init__(self):
        if min(self.buchstab_work_budget, self.ennola_proven_exponent,
               self.ennola_y_cap, self.ht_to_htfast_y, self.dickman_exponent) <= 0:
            raise ValueError("policy thresholds must be positive")
        if self.ennola_proven_exponent >= 1:
            raise ValueError("ennola_proven_exponent must be < 1")
        if self.dickman_exponent <= 2:
            raise ValueError("dickman_exponent must be > 2")
        if self.overrides is not None and self.overrides not in METHODS:
            raise ValueError(f"unknown method {self.overrides!r}; expected one of {METHODS}")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SelectorPolicy":
        return cls.from_text(Path(path).read_text())

    @classmethod
    def from_text(cls, text: str) -> "SelectorPolicy":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep or key not in types:
                raise ValueError(f"line {lineno}: expected '<field> = <value>', got {raw!r}")
            if key == "overrides":
                values[key] = None if value.lower() in ("", "none") else value
            elif types[key] == "int":
                values[key] = int(float(value)) if "^" not in value else _power(value)
            else:
                values[key] = float(value)
        return replace(cls(), **values)


def _power(text: str) -> int:
    base, exp = text.split("^")
    return int(base) ** int(exp)


@lru_cache(maxsize=1)
def _probe_rho() -> dickman.RhoTable:
    return dickman.build_rho()


@lru_cache(maxsize=1)
def _loglog_prefix() -> np.ndarray:
    ps = table_for(PROBE_PRIME_LIMIT).upto(PROBE_PRIME_LIMIT)
    return np.cumsum(np.log(np.log(ps.astype(np.float64))))


@lru_cache(maxsize=1)
def _log_factorials() -> np.ndarray:
    return gammaln(np.arange(len(_loglog_prefix()) + 1) + 1.0)


def log_psi_probe(x_log: float, y: float) -> float:
    """Cheap lower-leaning estimate of log Psi(x, y), nondecreasing in y.

    The larger of the two-term Dickman value and max over k <= pi(y) of
    log(prod_{i<=k} (log x / log p_i) / k!), the simplex volume that bounds
    Psi(x, p_k) from below. The Dickman term alone collapses for tiny y.
    """
    if x_log <= math.log(y):
        return x_log
    probe = -math.inf
    table = _probe_rho()
    if x_log / math.log(y) <= table.u_max:
        probe = dickman.estimate_dickman(x_log, y, table).log_value
    # Psi(x, y) >= Psi(x, min(y, limit)), so the bound stays valid above the limit
    prefix = _loglog_prefix()
    k = table_for(PROBE_PRIME_LIMIT).pi(min(y, PROBE_PRIME_LIMIT))
    if k:
        ks = np.arange(1, k + 1)
        volumes = ks * math.log(x_log) - prefix[:k] - _log_factorials()[1:k + 1]
        probe = max(probe, float(volumes.max()))
    # the Dickman value overshoots x just above u = 1
    return min(probe, x_log)


def recommend(x_log: float, y: float, policy: SelectorPolicy = SelectorPolicy(),
              dtable_ymax: Optional[int] = None) -> str:
    """Method label for (x, y); ``dtable_ymax`` is the reach of a cached Ennola table."""
    if policy.overrides is not None:
        return policy.overrides
    if x_log < math.log(2) or y < 2:
        raise ValueError("need x >= 2 and y >= 2")
    log_y = math.log(y)
    log_log_x = math.log(x_log) if x_log > 1 else -math.inf
    if log_psi_probe(x_log, y) <= math.log(policy.buchstab_work_budget):
        return "buchstab"
    if log_y >= policy.dickman_exponent * log_log_x:
        return "dickman"
    if log_y <= policy.ennola_proven_exponent * log_log_x:
        return "ennola"
    if y <= policy.ennola_y_cap and dtable_ymax is not None and y <= dtable_ymax:
        return "ennola"
    if y <= policy.ht_to_htfast_y:
        return "htalpha"
    return "htfast"
