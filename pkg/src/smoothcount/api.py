"""One entry point over every estimator, shared by the command line and scripts."""
from __future__ import annotations

import math
import time
from typing import Optional

from . import dickman, ennola, saddlepoint
from .errors import NeedsPrecompute, ResourceError
from .estimate import Estimate
from .exact_count import DEFAULT_BUDGET, psi_exact
from .primes import PrimeTable, table_for
from .selector import SelectorPolicy, recommend

METHODS = ("buchstab", "ennola", "ht", "htalpha", "htfast", "dickman")
# sieving beyond this is refused rather than attempted
SIEVE_LIMIT = 1 << 30

_default_rho: Optional[dickman.RhoTable] = None


def primes_upto(bound: int) -> PrimeTable:
    if bound > SIEVE_LIMIT:
        raise ResourceError(f"sieving to {bound} exceeds the limit {SIEVE_LIMIT}")
    return table_for(bound)


def default_rho() -> dickman.RhoTable:
    global _default_rho
    if _default_rho is None:
        _default_rho = dickman.build_rho()
    return _default_rho


def exact_estimate(x: int, y: int, budget: float = DEFAULT_BUDGET) -> Estimate:
    start = time.perf_counter()
    count = psi_exact(x, y, primes_upto(min(y, max(x, 2))), budget=budget)
    return Estimate(log_value=math.log(count) if count else -math.inf, method="buchstab",
                    value=count, diagnostics={"seconds": time.perf_counter() - start})


def estimate(x: int, y: int, method: str = "auto", *,
             dtable: Optional[ennola.EnnolaTable] = None,
             rho: Optional[dickman.RhoTable] = None,
             policy: Optional[SelectorPolicy] = None,
             budget: float = DEFAULT_BUDGET) -> Estimate:
    """Psi(x, y) by the named method; ``auto`` asks the selector first."""
    x, y = int(x), int(y)
    if x < 1 or y < 2:
        raise ValueError("need x >= 1 and y >= 2")
    x_log = math.log(x)
    if method == "auto":
        method = recommend(max(x_log, math.log(2)), y, policy or SelectorPolicy(),
                           dtable_ymax=dtable.y_max if dtable is not None else None)
        if method == "ennola" and (dtable is None or dtable.y_max < y):
            # only reached for y <= (log x)^(3/4): a few hundred at most, so build it here
            dtable = ennola.precompute_dtable(primes_upto(y), y)
    if method == "buchstab":
        return exact_estimate(x, y, budget)
    if x < 2:
        raise ValueError("estimators need x >= 2")
    if method == "ennola":
        if dtable is None:
            raise NeedsPrecompute("ennola needs a coefficient table; run precompute --ymax <y> first")
        return ennola.estimate_ennola(x_log, y, dtable, primes=primes_upto(y))
    if method == "dickman":
        return dickman.estimate_dickman(x_log, y, rho or default_rho())
    if method == "htfast":
        return saddlepoint.estimate_htfast(x_log, y, primes_upto(saddlepoint.cutoff(y)))
    if method in ("ht", "htalpha"):
        primes = primes_upto(y)
        run = saddlepoint.estimate_ht if method == "ht" else saddlepoint.estimate_htalpha
        return run(x_log, y, primes)
    raise ValueError(f"unknown method {method!r}; expected auto or one of {METHODS}")
