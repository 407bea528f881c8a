"""Reference computations that share no code with the package."""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import integrate


def trial_division_primes(n: int) -> list[int]:
    return [k for k in range(2, n + 1) if all(k % d for d in range(2, math.isqrt(k) + 1))]


def largest_prime_factor_table(n: int) -> np.ndarray:
    """lpf[k] = largest prime factor of k (lpf[1] = 1)."""
    lpf = np.ones(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if lpf[p] == 1:  # untouched so far, hence prime
            lpf[p::p] = p
    lpf[0] = 0
    return lpf


def enumerate_smooth(x: int, y: int) -> int:
    """Count y-smooth n <= x by generating them as prime products."""
    ps = trial_division_primes(y)

    def walk(bound: int, i: int) -> int:
        total = 1
        for j in range(i, len(ps)):
            p = ps[j]
            if p > bound:
                break
            total += walk(bound // p, j)
        return total

    return walk(x, 0)


def c_coefficients(m: int, dps: int = 50) -> list:
    """Taylor coefficients of t/(1 - e^-t) from Bernoulli numbers: c_k = (-1)^k B_k / k!."""
    with mpmath.workdps(dps):
        return [(-1) ** k * mpmath.bernoulli(k) / mpmath.factorial(k) for k in range(m + 1)]


def d_coefficients(primes: list[int], m: int, dps: int = 50) -> list:
    """Coefficients 0..m of prod_p sum_k c_k (s log p)^k, in mpmath."""
    with mpmath.workdps(dps):
        c = c_coefficients(m, dps)
        F = [mpmath.mpf(1)] + [mpmath.mpf(0)] * m
        for p in primes:
            L = mpmath.log(p)
            f = [c[k] * L ** k for k in range(m + 1)]
            F = [mpmath.fsum(F[i] * f[n - i] for i in range(n + 1)) for n in range(m + 1)]
        return F


def zeta_even_closed(k: int) -> float:
    """zeta(2k) from mpmath."""
    return float(mpmath.zeta(2 * k))


def rho_on_2_3(u: float) -> float:
    """rho(u) for 2 <= u <= 3: 1 - log u + int_2^u log(t - 1)/t dt."""
    val, _ = integrate.quad(lambda t: math.log(t - 1) / t, 2, u, epsabs=1e-15, epsrel=1e-13)
    return 1 - math.log(u) + val


def b_quadrature(s: float, y: float, z: float) -> float:
    """Head of B over p <= z plus the tail sum_k int_z^y t^-ks dt by adaptive quadrature."""
    ps = np.array(trial_division_primes(int(z)), dtype=np.float64)
    logs = np.log(ps)
    head = float(np.sum(logs / np.expm1(s * logs)))
    kmax = int(math.floor(math.log(y) / s))

    def integrand(u: float) -> float:
        # t = e^u, dt = e^u du
        return sum(math.exp(u * (1 - k * s)) for k in range(1, kmax + 1))

    tail, _ = integrate.quad(integrand, math.log(z), math.log(y), epsabs=0, epsrel=1e-12, limit=200)
    return head + tail


def phi1_direct(s: float, primes) -> float:
    return -math.fsum(math.log(p) / (p ** s - 1) for p in primes)
