"""Exact Psi(x, y) by Buchstab's identity, plus a brute-force oracle.

Two evaluation strategies share the identity

    Psi(x, p_k) = Psi(x, p_{k-1}) + Psi(x // p_k, p_k),
    Psi(x, 2)   = floor(log2 x) + 1,

which telescopes to Psi(x, y) = 1 + sum_{p <= y} Psi(x // p, p).

* ``table``: bottom-up over every distinct value x // n (about 2 sqrt(x) of
  them), one vectorised sweep per prime. Cost ~ 2 sqrt(x) pi(y).
* ``recursive``: memoised top-down recursion keyed on (x // n, k). Cost
  grows with Psi itself, so it only wins when y is tiny and x is huge.

The cheaper strategy is picked from a work estimate; if both exceed the budget
:class:`BudgetExceeded` is raised so callers can fall back to an estimator.
"""
from __future__ import annotations

import math
import sys
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, ResourceError
from .primes import PrimeTable

DEFAULT_BUDGET = 5 * 10**9
# one Python-level recursive call costs roughly this many vectorised cell updates
RECURSION_WEIGHT = 50
BRUTEFORCE_LIMIT = 10**8
# deeper Python recursion risks the C stack
MAX_RECURSION_DEPTH = 20000
_INT64_SAFE = 1 << 62


def _distinct_quotients(x: int) -> np.ndarray:
    r = math.isqrt(x)
    n = np.arange(1, r + 1, dtype=np.int64)
    return np.unique(np.concatenate([n, x // n]))


def _bit_length(v: np.ndarray) -> np.ndarray:
    bl = np.floor(np.log2(v.astype(np.float64))).astype(np.int64)
    # float log2 can be off by one next to powers of two
    bl[(np.int64(1) << bl) > v] -= 1
    bl[(np.int64(1) << (bl + 1)) <= v] += 1
    return bl + 1


def table_work(x: int, n_primes: int) -> float:
    return 2.0 * math.sqrt(x) * n_primes


def recursive_work(x_log: float, logs: np.ndarray) -> float:
    """Rough call count of the memoised recursion.

    Primes 2 and 3 are closed-form leaves, so the count is the lattice-point
    volume of the simplex over the remaining primes, with a unit shift per
    axis to stay on the generous side.
    """
    rest = logs[2:]
    if len(rest) == 0:
        return 1.0
    log_vol = float(np.sum(np.log(x_log / rest + 1.0))) - math.lgamma(len(rest) + 1)
    return math.exp(min(log_vol, 700.0))


def _psi_table(x: int, primes: np.ndarray) -> int:
    vals = _distinct_quotients(x)
    size = len(vals)
    r = math.isqrt(x)
    acc = _bit_length(vals)
    for p in primes[1:]:
        p = int(p)
        first = int(np.searchsorted(vals, p))
        lo = first
        bound = p
        while lo < size:
            # block [p^j, p^(j+1)) reads only from the block below it
            bound = bound * p if bound <= x // p else x + 1
            hi = int(np.searchsorted(vals, bound))
            v = vals[lo:hi]
            q = v // p
            idx = np.where(q <= r, q - 1, size - x // np.maximum(q, 1))
            acc[lo:hi] += acc[idx]
            lo = hi
    return int(acc[-1])


def _psi_recursive(x: int, primes: list[int], budget_calls: float) -> int:
    memo: dict[tuple[int, int], int] = {}
    calls = 0

    def pow2_count(z: int) -> int:
        return z.bit_length()

    def pow23_count(z: int) -> int:
        total = 0
        while z:
            total += z.bit_length()
            z //= 3
        return total

    def rec(z: int, k: int) -> int:
        # Psi(z, primes[k])
        nonlocal calls
        if z == 0:
            return 0
        if primes[k] >= z:
            return z
        if k == 0:
            return pow2_count(z)
        if k == 1:
            return pow23_count(z)
        key = (z, k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        calls += 1
        if calls > budget_calls:
            raise BudgetExceeded(f"recursive Buchstab passed {budget_calls:.3g} calls")
        total = 1
        for j in range(k + 1):
            q = z // primes[j]
            if q == 0:
                break
            total += rec(q, j)
        memo[key] = total
        return total

    # every level past k = 1 divides by at least 5
    depth = int(math.log(x) / math.log(5)) + 64
    if depth > MAX_RECURSION_DEPTH:
        raise ResourceError(f"recursion would nest {depth} deep (limit {MAX_RECURSION_DEPTH})")
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, depth + 200))
    try:
        return rec(x, len(primes) - 1)
    finally:
        sys.setrecursionlimit(old_limit)


def psi_exact(x: int, y: int, primes: PrimeTable, budget: float = DEFAULT_BUDGET,
              strategy: Optional[str] = None) -> int:
    """Exact count of y-smooth integers in [1, x] (1 included).

    ``strategy`` forces ``"table"`` or ``"recursive"``; by default the one with
    the smaller work estimate is used. Raises :class:`BudgetExceeded` when the
    chosen strategy's estimated work passes ``budget``.
    """
    x = int(x)
    y = int(y)
    if y < 2:
        raise ValueError("y must be >= 2")
    if x < 1:
        return 0
    if y >= x:
        return x
    ps = primes.upto(y)
    if len(ps) == 1:
        return x.bit_length()

    t_work = table_work(x, len(ps)) if x < _INT64_SAFE else math.inf
    logs = primes.log_primes(y)
    r_work = RECURSION_WEIGHT * recursive_work(math.log(x), logs)
    if strategy is None:
        strategy = "table" if t_work <= r_work else "recursive"
    work = t_work if strategy == "table" else r_work
    if work > budget:
        raise BudgetExceeded(
            f"Psi({x}, {y}) needs ~{work:.3g} work units, budget is {budget:.3g}")
    if strategy == "table":
        return _psi_table(x, ps)
    if strategy == "recursive":
        return _psi_recursive(x, [int(p) for p in ps], budget / RECURSION_WEIGHT)
    raise ValueError(f"unknown strategy {strategy!r}")


def psi_bruteforce(x: int, y: int) -> int:
    """Count n <= x free of prime factors above y by dividing out small primes.

    Independent of Buchstab's identity; used only as a test oracle.
    """
    x = int(x)
    y = int(y)
    if x > BRUTEFORCE_LIMIT:
        raise BudgetExceeded(f"brute force limited to x <= {BRUTEFORCE_LIMIT}")
    if x < 1:
        return 0
    root = math.isqrt(x)
    divisors = [p for p in range(2, min(y, root) + 1)
                if all(p % q for q in range(2, math.isqrt(p) + 1))]
    count = 0
    for lo in range(1, x + 1, 1 << 20):
        hi = min(lo + (1 << 20), x + 1)
        rest = np.arange(lo, hi, dtype=np.int64)
        for p in divisors:
            pk = p
            while pk < hi:
                start = -(-lo // pk) * pk
                rest[start - lo::pk] //= p
                pk *= p
        if y >= root:
            # what survives is 1 or a single prime above sqrt(x)
            count += int(np.count_nonzero(rest <= y))
        else:
            count += int(np.count_nonzero(rest == 1))
    return count
