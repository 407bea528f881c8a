"""Psi(x, y) from Ennola's second theorem.

Psi(x, y) ~ T * R_m(1/log x), with T = prod_{p<=y} log x / log p and

    R_m(t) = sum_{n=0}^{m} d_n t^n / (pi(y) - n)!

where d_n is the coefficient of s^n in prod_{p<=y} sum_k c_k (s log p)^k.

The d_n rows are the expensive part. One pass over the primes up to y_max
yields the rows for every smaller prime bound, so they are precomputed into an
:class:`EnnolaTable` (and persisted by :mod:`smoothcount.store`). All
arithmetic is carried in numpy ``longdouble``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NeedsPrecompute, ResourceError
from .estimate import Estimate
from .primes import PrimeTable

LD = np.longdouble
PI_LD = LD("3.14159265358979323846264338327950288")
TWO_PI_LD = 2 * PI_LD
PRECISION = int(np.finfo(LD).precision)
DEFAULT_MEM_CAP = 1 << 30


@dataclass(frozen=True)
class ZetaEvenSeq:
    """``values[k]`` holds zeta(2k) for k >= 1; ``values[0]`` is unused (nan)."""

    values: np.ndarray

    def __getitem__(self, k: int):
        if k < 1:
            raise IndexError("zeta(2k) is stored for k >= 1 only")
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CSeq:
    """Taylor coefficients c_0..c_m of t / (1 - exp(-t))."""

    c: np.ndarray

    def __getitem__(self, k: int):
        return self.c[k]

    def __len__(self) -> int:
        return len(self.c)


@dataclass
class EnnolaTable:
    """d_n rows for every prime bound up to ``y_max``.

    ``rows[j]`` belongs to the prime ``primes[j]`` and holds d_0..d_{m_j} with
    m_j = min(m, j + 1).
    """

    y_max: int
    m: int
    primes: np.ndarray
    rows: list
    precision: int = PRECISION

    def n_primes(self, y: float) -> int:
        return int(np.searchsorted(self.primes, math.floor(y), side="right"))

    def row(self, y: float) -> np.ndarray:
        if y > self.y_max:
            raise NeedsPrecompute(
                f"coefficient table covers y <= {self.y_max}; run precompute with --ymax >= {int(y)}")
        k = self.n_primes(y)
        if k == 0:
            raise ValueError("y must be >= 2")
        return self.rows[k - 1]

    def log_primes(self) -> np.ndarray:
        return np.log(self.primes.astype(LD))


def zeta_even(m: int) -> ZetaEvenSeq:
    """zeta(2k) for 0 < 2k <= m from zeta(2) = pi^2/6 and the convolution recurrence."""
    if m < 2:
        raise ValueError("m must be >= 2")
    kmax = m // 2
    z = np.full(kmax + 1, np.nan, dtype=LD)
    z[1] = PI_LD * PI_LD / 6
    for k in range(2, kmax + 1):
        # sum_{j=1}^{k-1} zeta(2j) zeta(2k-2j)
        z[k] = np.dot(z[1:k], z[k - 1:0:-1]) / (k + LD(0.5))
    return ZetaEvenSeq(z)


def c_seq(m: int, zeta: Optional[ZetaEvenSeq] = None) -> CSeq:
    if zeta is None:
        zeta = zeta_even(max(m, 2))
    if 2 * (len(zeta) - 1) < m - 1:
        raise ValueError("zeta sequence too short for requested m")
    c = np.zeros(m + 1, dtype=LD)
    c[0] = 1
    if m >= 1:
        c[1] = LD(0.5)
    inv = 1 / (TWO_PI_LD * TWO_PI_LD)
    scale = LD(2)
    for k in range(1, m // 2 + 1):
        scale *= inv
        c[2 * k] = (scale if k % 2 else -scale) * zeta[k]
    return CSeq(c)


def _even_factor(log_p, zeta_vals: np.ndarray, half: int) -> np.ndarray:
    """[1, c_2 L^2, c_4 L^4, ...] for L = log p, built from (L/2pi)^2 powers.

    Building the powers of L/2pi directly keeps every entry in range even when
    (2pi)^{2k} alone would overflow.
    """
    ratio = (log_p / TWO_PI_LD) ** 2
    out = np.empty(half + 1, dtype=LD)
    out[0] = 1
    if half:
        powers = np.cumprod(np.full(half, ratio, dtype=LD))
        signs = np.where(np.arange(1, half + 1) % 2 == 1, LD(2), LD(-2))
        out[1:] = signs * zeta_vals[1:half + 1] * powers
    return out


def _conv_trunc(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """First n coefficients of a*b, skipping most of the discarded upper half."""
    out = np.zeros(n, dtype=a.dtype)
    a = a[:n]
    b = b[:n]
    block = max(64, n // 8)
    for off in range(0, len(a), block):
        keep = n - off
        out[off:] += np.convolve(a[off:off + block], b[:keep])[:keep]
    return out


def _times_factor(F: np.ndarray, half_log_p, even: np.ndarray) -> np.ndarray:
    # f_{p,m}(s) = E(s^2) + (L/2) s, so F*f = Fe(s^2)E(s^2) + s Fo(s^2)E(s^2) + (L/2) s F
    out = np.empty_like(F)
    fe = F[0::2]
    fo = F[1::2]
    out[0::2] = _conv_trunc(fe, even, len(fe))
    if len(fo):
        out[1::2] = _conv_trunc(fo, even, len(fo))
    out[1:] += half_log_p * F[:-1]
    return out


def table_bytes(n_primes: int, m: int) -> int:
    itemsize = np.dtype(LD).itemsize
    entries = sum(min(m, j) + 1 for j in range(1, n_primes + 1))
    return entries * itemsize


def precompute_dtable(primes: PrimeTable, y_max: int, m: Optional[int] = None,
                      mem_cap: int = DEFAULT_MEM_CAP) -> EnnolaTable:
    """Run the truncated product over every prime <= y_max, harvesting one row per prime."""
    ps = primes.upto(y_max).copy()
    n = len(ps)
    if n == 0:
        raise ValueError("y_max must be >= 2")
    if m is None:
        m = n
    if m < 1:
        raise ValueError("m must be >= 1")
    need = table_bytes(n, m)
    if need > mem_cap:
        raise ResourceError(f"table for y_max={y_max}, m={m} needs ~{need / 2**20:.0f} MiB, "
                            f"cap is {mem_cap / 2**20:.0f} MiB")
    half = m // 2
    zeta = zeta_even(max(2 * half, 2)).values
    F = np.zeros(m + 1, dtype=LD)
    F[0] = 1
    rows = []
    for j, p in enumerate(ps, start=1):
        log_p = np.log(LD(int(p)))
        F = _times_factor(F, log_p / 2, _even_factor(log_p, zeta, half))
        row = F[: min(m, j) + 1].copy()
        if not np.all(np.isfinite(row)):
            raise ResourceError(f"d_n coefficients overflow extended precision at p={int(p)}")
        rows.append(row)
    ps.setflags(write=False)
    return EnnolaTable(y_max=int(y_max), m=int(m), primes=ps, rows=rows)


def choose_m(x_log: float, y: float, primes: PrimeTable) -> int:
    """Truncation point for R_m, clamped to pi(y)."""
    if x_log <= 0:
        raise ValueError("log x must be positive")
    log_y = math.log(y)
    n0 = max(math.log2(x_log), math.e * log_y, math.e * y * y / (x_log * log_y))
    return int(math.floor(min(primes.pi(y), n0)))


def log_weights(x_log, n_primes: int) -> np.ndarray:
    """log f_n for n = 0..pi(y), f_n = (log x)^{pi(y)-n} / (pi(y)-n)!.

    Built from f_{pi(y)} = 1 and f_n = f_{n+1} log x / (pi(y) - n), in log form.
    """
    steps = np.log(LD(x_log)) - np.log(np.arange(1, n_primes + 1, dtype=LD))
    from_top = np.concatenate([np.zeros(1, dtype=LD), np.cumsum(steps)])
    return from_top[::-1]


def weighted_sum_log(row: np.ndarray, x_log, n_primes: int, m: int) -> tuple[float, float]:
    """(log |S|, sign S) for S = sum_{n<=m} d_n f_n, accumulated from n = pi(y) down."""
    logf = log_weights(x_log, n_primes)[: m + 1]
    d = row[: m + 1]
    with np.errstate(divide="ignore"):
        mag = logf + np.log(np.abs(d))
    shift = np.max(mag)
    terms = np.sign(d) * np.exp(mag - shift)
    total = np.sum(terms[::-1])
    if total == 0:
        return -math.inf, 0.0
    return float(shift + np.log(np.abs(total))), float(np.sign(total))


def estimate_ennola(x_log: float, y: float, table: EnnolaTable,
                    primes: Optional[PrimeTable] = None, m: Optional[int] = None) -> Estimate:
    """T * R_m(1/log x) evaluated in log space.

    ``m`` defaults to :func:`choose_m`; it is capped by what the row holds.
    """
    start = time.perf_counter()
    row = table.row(y)
    k = table.n_primes(y)
    if m is None:
        if primes is None:
            from .primes import table_for
            primes = table_for(y)
        m = choose_m(x_log, y, primes)
    m = min(m, len(row) - 1)
    log_sum, sign = weighted_sum_log(row, x_log, k, m)
    if sign <= 0:
        raise ArithmeticError(f"Ennola sum is non-positive at log x={x_log}, y={y}")
    log_p = table.log_primes()[:k]
    log_value = log_sum - float(np.sum(np.log(log_p)))
    return Estimate.from_log(log_value, "ennola", m=m, pi_y=k,
                             seconds=time.perf_counter() - start)
