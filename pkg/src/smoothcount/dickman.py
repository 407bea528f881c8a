"""Dickman's rho and the two-term estimate x rho(u) + (1 - gamma) x/log x rho(u - 1).

rho(u) = 1 on [0, 1] and u rho'(u) = -rho(u - 1) beyond. The table is built
from the integrated form

    u rho(u) = int_{u-1}^{u} rho(t) dt,

which, unlike rho(u) = rho(v) - int_v^u rho(t-1)/t dt, has no subtraction and
fixes the constant of integration. The difference form lets every local error
excite the slowly decaying ~1/u solution of the same equation, which swamps
rho itself by u ~ 11 in double precision.

Each grid cell is integrated by the end-corrected trapezoid rule
h/2 (r_a + r_b) + h^2/12 (r'_a - r'_b), with r' taken exactly from the
equation, so no rule straddles the kinks at the integers. The table keeps
log rho, and each unit interval is solved on a rescaled copy of the one before,
so it extends far past the point where rho itself underflows.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange
from .estimate import Estimate

GAMMA = 0.57721566490153286061
DEFAULT_U_MAX = 64.0
DEFAULT_H = 1.0 / 256


@dataclass(frozen=True)
class RhoTable:
    u_max: float
    h: float
    values: np.ndarray  # log rho(k h), k = 0..ceil(u_max / h)
    gamma: float = GAMMA

    @property
    def per_unit(self) -> int:
        return int(round(1.0 / self.h))

    def grid_rho(self, k: int) -> float:
        return math.exp(self.values[k])


def build_rho(u_max: float = DEFAULT_U_MAX, h: float = DEFAULT_H) -> RhoTable:
    """Tabulate log rho on the grid k h up to ceil(u_max / h)."""
    if not u_max >= 1:
        raise ValueError("u_max must be >= 1")
    if not 0 < h <= 1 / 64:
        raise ValueError("h must lie in (0, 1/64]")
    per_unit = round(1.0 / h)
    if abs(per_unit * h - 1.0) > 1e-12:
        raise ValueError("1/h must be an integer so that u - 1 stays on the grid")
    h = 1.0 / per_unit
    n_points = math.ceil(u_max * per_unit - 1e-9) + 1
    units = -(-(n_points - 1) // per_unit)
    log_rho = np.zeros(units * per_unit + 1)
    offsets = np.arange(per_unit + 1) * h
    corr_scale = h * h / 12
    # the equation is linear, so each unit is solved on a rescaled copy of the
    # previous one (prev[-1] = 1) and the scale is carried in log form
    prev = np.ones(per_unit + 1)
    prev_cells = np.full(per_unit, h)  # [0, 1]: rho = 1, rho' = 0
    log_scale = 0.0
    for n in range(1, units):
        lo = n * per_unit
        deriv = -prev / (n + offsets)
        # window [u - 1, u] = tail of the previous unit + head of this one;
        # both are sums of positive cells, accumulated small to large
        tail = np.append(np.cumsum(prev_cells[::-1])[::-1], 0.0)
        cur = np.empty(per_unit + 1)
        cur[0] = prev[-1]
        cells = np.empty(per_unit)
        head = 0.0
        for j in range(1, per_unit + 1):
            corr = corr_scale * (deriv[j - 1] - deriv[j])
            r = (tail[j] + head + 0.5 * h * cur[j - 1] + corr) / (n + j * h - 0.5 * h)
            cell = 0.5 * h * (cur[j - 1] + r) + corr
            cells[j - 1] = cell
            head += cell
            cur[j] = r
        log_rho[lo + 1:lo + per_unit + 1] = np.log(cur[1:]) + log_scale
        end = cur[-1]
        log_scale += math.log(end)
        prev = cur / end
        prev_cells = cells / end
    values = log_rho[:n_points]
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("rho table holds non-finite values")
    values.setflags(write=False)
    return RhoTable(u_max=float(u_max), h=h, values=values)


def rho_log(table: RhoTable, u: float) -> float:
    """log rho(u); -inf for u < 0."""
    if u < 0:
        return -math.inf
    if u <= 1:
        return 0.0
    if u > table.u_max:
        raise OutOfRange(f"rho({u}) requested but the table stops at u_max={table.u_max}")
    per_unit = table.per_unit
    pos = u * per_unit
    k = int(math.floor(pos))
    if pos == k:
        return float(table.values[k])
    # four-point stencil kept inside the unit interval holding u: log rho has
    # a kink at every integer, so straddling one would cost accuracy
    unit = min(int(math.floor(u)), int(math.floor(table.u_max)))
    lo = unit * per_unit
    hi = min(lo + per_unit, len(table.values) - 1)
    start = min(max(k - 1, lo), hi - 3)
    xs = np.arange(start, start + 4, dtype=np.float64)
    ys = table.values[start:start + 4]
    total = 0.0
    for i in range(4):
        w = 1.0
        for j in range(4):
            if j != i:
                w *= (pos - xs[j]) / (xs[i] - xs[j])
        total += w * ys[i]
    return total


def rho(table: RhoTable, u: float) -> float:
    """rho(u) by cubic interpolation of log rho; 1 on [0, 1], 0 for u < 0."""
    if u < 0:
        return 0.0
    return math.exp(rho_log(table, u))


def estimate_dickman(x_log: float, y: float, table: RhoTable, two_term: bool = True) -> Estimate:
    """x rho(u) + (1 - gamma) x/log x rho(u - 1), with u = log x / log y.

    For u <= 1 the estimate is x itself. ``two_term=False`` gives x rho(u).
    """
    start = time.perf_counter()
    if x_log <= 0:
        raise ValueError("log x must be positive")
    u = x_log / math.log(y)
    if u <= 1:
        log_value = x_log
    else:
        log_value = x_log + rho_log(table, u)
        if two_term:
            second = math.log1p(-table.gamma) - math.log(x_log) + rho_log(table, u - 1)
            log_value = float(np.logaddexp(log_value, x_log + second))
    return Estimate.from_log(log_value, "dickman", u=u, two_term=two_term,
                             seconds=time.perf_counter() - start)
