"""Saddle-point estimates: Algorithm HT, HT-fast and HT-alpha.

All three evaluate

    HT(x, y, s) = x^s zeta(s, y) / (s sqrt(2 pi phi2(s, y)))

at the root alpha of phi1(s, y) + log x = 0. They differ in how the prime
sums are obtained:

* HT sums over every prime <= y.
* HT-fast sums exactly up to z ~ 5 sqrt(y) and replaces the rest by the
  prime-number-theorem integral, expanded geometrically in t^{-ks}.
* HT-alpha runs Newton on the fast model first, then polishes the root with a
  step or two on the exact sums and evaluates HT exactly.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expi

from .errors import NoConvergence
from .estimate import Estimate
from .primes import PrimeTable

MAX_ITER = 200
S_MAX = 50.0
SINGULAR = 1e-9
_LOG_2PI = math.log(2 * math.pi)
_NEGLIGIBLE = 2.0 ** -60


@dataclass
class SaddleContext:
    x_log: float
    y: int
    u_bar: float
    alpha0: float
    z: int
    tolerance_exact: float
    tolerance_fast: float
    alpha: Optional[float] = None
    iterations_fast: int = 0
    iterations_exact: int = 0

    @classmethod
    def make(cls, x_log: float, y: int) -> "SaddleContext":
        if x_log <= 0 or y < 2:
            raise ValueError("need log x > 0 and y >= 2")
        y = int(y)
        log_y = math.log(y)
        u_bar = min(x_log / log_y, y / log_y)
        scale = 1.0 / (u_bar * x_log)
        return cls(
            x_log=x_log,
            y=y,
            u_bar=u_bar,
            alpha0=math.log1p(y / (5 * x_log)) / log_y,
            z=cutoff(y),
            tolerance_exact=min(1e-4, scale),
            tolerance_fast=min(1e-6, scale),
        )


def cutoff(y: int) -> int:
    """Exact-sum cutoff z = min(y, max(1000, ceil(5 sqrt y)))."""
    return int(min(y, max(1000, math.ceil(5 * math.sqrt(y)))))


def _check_s(s: float) -> None:
    if not s > 0:
        raise ValueError(f"s must be positive (pole at s = 0), got {s}")


# --- exact prime sums -------------------------------------------------------

class _Moments:
    """phi1, phi2 and d phi2/ds over a fixed set of log-primes.

    With q = L/(p^s - 1):  phi1 = -sum q,  phi2 = sum q^2 + sum q L  and
    d phi2/ds = -(sum q L^2 + 3 sum q^2 L + 2 sum q^3). One product of the
    rows (1, L, L^2) with (q, q^2, q^3) gives every sum needed.
    """

    def __init__(self, powers: np.ndarray):
        self.powers = powers
        self.logs = powers[1]
        self.qp = np.empty((3, len(self.logs)))
        self.den = np.empty_like(self.logs)

    def __call__(self, s: float, zeta: bool = False):
        den, qp = self.den, self.qp
        np.multiply(self.logs, s, out=den)
        np.expm1(den, out=den)
        np.divide(self.logs, den, out=qp[0])
        np.multiply(qp[0], qp[0], out=qp[1])
        np.multiply(qp[1], qp[0], out=qp[2])
        m = (self.powers @ qp.T).tolist()  # m[a][b] = sum L^a q^(b+1)
        out = (-m[0][0], m[0][1] + m[1][0], -(m[2][0] + 3 * m[1][1] + 2 * m[0][2]))
        if zeta:
            # log (1 - p^-s)^-1 = log1p(1 / (p^s - 1))
            np.reciprocal(den, out=den)
            return out + (float(np.log1p(den).sum()),)
        return out


def phi1(s: float, y: float, primes: PrimeTable) -> float:
    _check_s(s)
    logs = primes.log_primes(y)
    return -float(np.sum(logs / np.expm1(s * logs)))


def phi2(s: float, y: float, primes: PrimeTable) -> float:
    _check_s(s)
    return _Moments(primes.log_powers(y))(s)[1]


def phi2_derivative(s: float, y: float, primes: PrimeTable) -> float:
    _check_s(s)
    return _Moments(primes.log_powers(y))(s)[2]


def zeta_partial_log(s: float, y: float, primes: PrimeTable) -> float:
    """log prod_{p<=y} (1 - p^-s)^-1."""
    _check_s(s)
    logs = primes.log_primes(y)
    return -float(np.sum(np.log1p(-np.exp(-s * logs))))


# --- prime-number-theorem tails --------------------------------------------

def _n_terms(s: float, y: float) -> int:
    return int(math.floor(math.log(y) / s))


def _power_integral(b: float, lz: float, ly: float) -> float:
    """int_z^y t^(b-1) dt = (y^b - z^b)/b, finite at b = 0."""
    if abs(b) < SINGULAR:
        return ly - lz
    return math.exp(b * lz) * math.expm1(b * (ly - lz)) / b


def _power_log_integral(b: float, lz: float, ly: float) -> float:
    """int_{lz}^{ly} e^(b u) u du."""
    if abs(b) < SINGULAR:
        return (ly * ly - lz * lz) / 2
    if abs(b) * ly <= 1.0:
        total = 0.0
        term = 1.0
        for j in range(60):
            # b^j / j! * (ly^(j+2) - lz^(j+2)) / (j+2)
            add = term * (ly ** (j + 2) - lz ** (j + 2)) / (j + 2)
            total += add
            if abs(add) <= 1e-17 * abs(total):
                break
            term *= b / (j + 1)
        return total

    def anti(u: float) -> float:
        return math.exp(b * u) * (u / b - 1.0 / (b * b))

    return anti(ly) - anti(lz)


def _power_over_log_integral(b: float, lz: float, ly: float) -> float:
    """int_{lz}^{ly} e^(b u) / u du = Ei(b ly) - Ei(b lz)."""
    if abs(b) < SINGULAR:
        return math.log(ly / lz)
    if abs(b) * ly <= 1.0:
        total = math.log(ly / lz)
        term = 1.0
        for n in range(1, 80):
            term *= b / n
            add = term * (ly ** n - lz ** n) / n
            total += add
            if abs(add) <= 1e-17 * abs(total):
                break
        return total
    return float(expi(b * ly) - expi(b * lz))


def _tail_grid(s: float, y: float, z: float):
    lz, ly = math.log(z), math.log(y)
    k = np.arange(1, _n_terms(s, y) + 1, dtype=np.float64)
    b = 1.0 - k * s
    near = np.flatnonzero(np.abs(b) * ly <= 1.0)
    return k, b, lz, ly, near


def _tail_B_phi2(s: float, y: float, z: float) -> tuple[float, float]:
    """Integral tails of B and of the fast phi2.

    For b = 1 - k s the integrands are e^(b u) and k e^(b u) u over
    [log z, log y]; e^(b log y) and e^(b log z) are advanced geometrically in k.
    """
    lz, ly = math.log(z), math.log(y)
    rz = math.exp(-s * lz)
    ry = math.exp(-s * ly)
    ez, ey = float(z), float(y)
    tb = tp = 0.0
    for k in range(1, _n_terms(s, y) + 1):
        ez *= rz
        ey *= ry
        b = 1.0 - k * s
        if abs(b) * ly <= 1.0:
            tb += _power_integral(b, lz, ly)
            tp += k * _power_log_integral(b, lz, ly)
            continue
        inv = 1.0 / b
        y0 = ey * inv
        z0 = ez * inv
        db = y0 - z0
        dp = k * (y0 * (ly - inv) - z0 * (lz - inv))
        tb += db
        tp += dp
        # past b < 0 every term is positive and shrinks by at most (k+1)/k * z^-s;
        # once that ratio is <= 1/2 the rest is bounded by the current term
        if b < 0 and dp <= _NEGLIGIBLE * tp and (k + 1) * rz <= 0.5 * k:
            break
    return tb, tp


def _tail_zeta(s: float, y: float, z: float) -> float:
    k, b, lz, ly, near = _tail_grid(s, y, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = expi(b * ly) - expi(b * lz)
    for i in near:
        terms[i] = _power_over_log_integral(float(b[i]), lz, ly)
    return float(np.sum(terms / k))


def B(s: float, y: float, z: float, primes: PrimeTable) -> float:
    """Fast model of -phi1: exact below z, integral tail from z to y."""
    _check_s(s)
    if z > y:
        raise ValueError("need z <= y")
    logs = primes.log_primes(z)
    head = float(np.sum(logs / np.expm1(s * logs)))
    return head if z == y else head + _tail_B_phi2(s, y, z)[0]


def fast_phi2(s: float, y: float, z: float, primes: PrimeTable) -> float:
    _check_s(s)
    head = phi2(s, z, primes)
    return head if z >= y else head + _tail_B_phi2(s, y, z)[1]


def fast_zeta_log(s: float, y: float, z: float, primes: PrimeTable) -> float:
    _check_s(s)
    head = zeta_partial_log(s, z, primes)
    return head if z >= y else head + _tail_zeta(s, y, z)


# --- Newton -----------------------------------------------------------------

def newton_alpha(f: Callable, fprime: Optional[Callable], start: float, tol: float,
                 s_max: float = S_MAX, max_iter: int = MAX_ITER,
                 fsecond: Optional[Callable] = None) -> tuple[float, int]:
    """Newton's method s <- s - f(s)/f'(s) for an increasing f.

    When ``fprime`` is None, ``f`` returns (f, f') or (f, f', f''). The
    distance of the new iterate from the root is estimated as C * step^2 with
    C = |f''| / (2 f'), the leading term of Newton's error recursion, capped
    by |step|. Without f'' the secant of f' over the previous step stands in
    for it, and on the first step the bare step length is used. Iteration
    stops once the estimate drops below ``tol``. A step that would make
    s <= 0 is halved until it does not.
    """
    if start <= 0 or tol <= 0:
        raise ValueError("start and tol must be positive")

    def evaluate(s: float) -> tuple:
        if fprime is None:
            out = f(s)
            return out if len(out) == 3 else (*out, None)
        return f(s), fprime(s), None if fsecond is None else fsecond(s)

    s = start
    prev = None
    curvature = None
    for it in range(1, max_iter + 1):
        fs, dfs, ddfs = evaluate(s)
        if not dfs > 0:
            raise NoConvergence(f"non-positive derivative {dfs} at s={s}")
        if ddfs is not None:
            curvature = abs(ddfs) / (2 * dfs)
        elif prev is not None:
            curvature = abs((dfs - prev[1]) / (s - prev[0])) / (2 * dfs)
        step = fs / dfs
        nxt = s - step
        damped = False
        while nxt <= 0:
            step /= 2
            nxt = s - step
            damped = True
        if not nxt <= s_max:
            raise NoConvergence(f"Newton iterate {nxt} left (0, {s_max}]")
        err = abs(step)
        if curvature is not None:
            err = min(err, curvature * step * step)
        # the error estimate only describes a full Newton step
        if err < tol and not damped:
            return nxt, it
        prev = (s, dfs)
        s = nxt
    raise NoConvergence(f"no convergence after {max_iter} iterations")


def _exact_f(ctx: SaddleContext, primes: PrimeTable) -> Callable:
    moments = _Moments(primes.log_powers(ctx.y))
    x_log = ctx.x_log

    def fdf(s: float) -> tuple[float, float, float]:
        p1, p2, p3 = moments(s)
        return p1 + x_log, p2, p3

    return fdf


def _fast_f(ctx: SaddleContext, primes: PrimeTable) -> Callable:
    # exact below z plus the integral tail; z = y leaves only the head.
    # Newton's error estimate falls back on the secant of phi2 here.
    moments = _Moments(primes.log_powers(ctx.z))
    has_tail = ctx.z < ctx.y
    x_log, y, z = ctx.x_log, ctx.y, ctx.z

    def fdf(s: float) -> tuple[float, float]:
        p1, p2, _ = moments(s)
        if has_tail:
            tb, tp = _tail_B_phi2(s, y, z)
            return p1 - tb + x_log, p2 + tp
        return p1 + x_log, p2

    return fdf


def ht_value_log(ctx: SaddleContext, alpha: float, primes: PrimeTable, fast: bool = False) -> float:
    """log HT(x, y, alpha)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    bound = ctx.z if fast else ctx.y
    _, p2, _, zlog = _Moments(primes.log_powers(bound))(alpha, zeta=True)
    if fast and ctx.z < ctx.y:
        p2 += _tail_B_phi2(alpha, ctx.y, ctx.z)[1]
        zlog += _tail_zeta(alpha, ctx.y, ctx.z)
    assert p2 > 0, "phi2 must be positive"
    return alpha * ctx.x_log + zlog - math.log(alpha) - 0.5 * (_LOG_2PI + math.log(p2))


def _diagnostics(ctx: SaddleContext, start: float) -> dict:
    return {
        "alpha": ctx.alpha,
        "iterations": ctx.iterations_fast + ctx.iterations_exact,
        "iterations_fast": ctx.iterations_fast,
        "iterations_exact": ctx.iterations_exact,
        "alpha0": ctx.alpha0,
        "z": ctx.z,
        "tolerance_exact": ctx.tolerance_exact,
        "tolerance_fast": ctx.tolerance_fast,
        "seconds": time.perf_counter() - start,
    }


def estimate_ht(x_log: float, y: int, primes: PrimeTable) -> Estimate:
    start = time.perf_counter()
    ctx = SaddleContext.make(x_log, y)
    ctx.alpha, ctx.iterations_exact = newton_alpha(
        _exact_f(ctx, primes), None, ctx.alpha0, ctx.tolerance_exact)
    value = ht_value_log(ctx, ctx.alpha, primes)
    return Estimate.from_log(value, "ht", **_diagnostics(ctx, start))


def estimate_htfast(x_log: float, y: int, primes: PrimeTable) -> Estimate:
    start = time.perf_counter()
    ctx = SaddleContext.make(x_log, y)
    ctx.alpha, ctx.iterations_fast = newton_alpha(
        _fast_f(ctx, primes), None, ctx.alpha0, ctx.tolerance_fast)
    value = ht_value_log(ctx, ctx.alpha, primes, fast=True)
    return Estimate.from_log(value, "htfast", **_diagnostics(ctx, start))


def estimate_htalpha(x_log: float, y: int, primes: PrimeTable,
                     fast_value: bool = False) -> Estimate:
    """Fast-model Newton to tolerance_fast, then exact Newton to tolerance_exact.

    The output is HT at the polished root with exact sums. ``fast_value``
    evaluates it with the fast zeta / phi2 models instead, which is cheaper
    and tracks HT-fast's value rather than HT's.
    """
    start = time.perf_counter()
    ctx = SaddleContext.make(x_log, y)
    alpha_f, ctx.iterations_fast = newton_alpha(
        _fast_f(ctx, primes), None, ctx.alpha0, ctx.tolerance_fast)
    ctx.alpha, ctx.iterations_exact = newton_alpha(
        _exact_f(ctx, primes), None, alpha_f, ctx.tolerance_exact)
    value = ht_value_log(ctx, ctx.alpha, primes, fast=fast_value)
    est = Estimate.from_log(value, "htalpha", **_diagnostics(ctx, start))
    est.diagnostics["alpha_fast"] = alpha_f
    return est
