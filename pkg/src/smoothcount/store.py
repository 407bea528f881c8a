"""Text persistence for Ennola coefficient tables and rho tables.

Coefficient file::

    SMOOTHCOUNT-DN v1
    ymax <int>
    m <int>
    precision <int>
    prime <p> <count>
    <d_0>
    ...

Rho file::

    SMOOTHCOUNT-RHO v1
    umax <real>
    h <real>
    values <n>
    <log rho(0)>
    ...

Numbers are written in scientific notation with 21 significant digits, enough
to bring an extended-precision value back bit for bit. Loading validates the
layout and runs a cheap integrity check: d[1] against (sum of log p)/2, and
the rho segment on [0, 2] against a fresh rebuild and against 1 - log 2.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, Optional, Union

import numpy as np

from .dickman import GAMMA, RhoTable, build_rho
from .ennola import LD, EnnolaTable
from .errors import CorruptTable, InsufficientPrecision, UnsupportedVersion
from .primes import build as build_primes

DN_MAGIC = "SMOOTHCOUNT-DN"
RHO_MAGIC = "SMOOTHCOUNT-RHO"
VERSION = "v1"
DIGITS = 21
D1_TOLERANCE = 1e-12
RHO2_TOLERANCE = 1e-9

Target = Union[str, Path, IO[str]]


@contextmanager
def _open(target: Target, mode: str) -> Iterator[IO[str]]:
    if isinstance(target, (str, Path)):
        with open(target, mode, encoding="ascii", newline="\n") as fh:
            yield fh
    else:
        yield target


def _fmt(x) -> str:
    return np.format_float_scientific(x, precision=DIGITS - 1, unique=False)


def _check_header(line: str, magic: str) -> None:
    parts = line.split()
    if len(parts) != 2 or parts[0] != magic:
        raise CorruptTable(f"expected header '{magic} {VERSION}', got {line.strip()!r}")
    if parts[1] != VERSION:
        raise UnsupportedVersion(f"{magic} version {parts[1]!r} is not supported (reader is {VERSION})")


def _meta(lines: Iterator[str], key: str) -> str:
    line = next(lines, None)
    if line is None:
        raise CorruptTable(f"file ends before the '{key}' line")
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise CorruptTable(f"expected '{key} <value>', got {line.strip()!r}")
    return parts[1]


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise CorruptTable(f"{what} is not an integer: {text!r}") from None


def save_dtable(table: EnnolaTable, destination: Target) -> None:
    with _open(destination, "w") as fh:
        fh.write(f"{DN_MAGIC} {VERSION}\n")
        fh.write(f"ymax {table.y_max}\nm {table.m}\nprecision {table.precision}\n")
        for p, row in zip(table.primes, table.rows):
            fh.write(f"prime {int(p)} {len(row)}\n")
            fh.write("\n".join(_fmt(v) for v in row))
            fh.write("\n")


def load_dtable(source: Target, min_precision: Optional[int] = None) -> EnnolaTable:
    """Read a coefficient table, validating layout, prime order and every d[1]."""
    with _open(source, "r") as fh:
        lines = iter(fh.read().splitlines())
    first = next(lines, None)
    if first is None:
        raise CorruptTable("empty coefficient file")
    _check_header(first, DN_MAGIC)
    y_max = _int(_meta(lines, "ymax"), "ymax")
    m = _int(_meta(lines, "m"), "m")
    precision = _int(_meta(lines, "precision"), "precision")
    if min_precision is not None and precision < min_precision:
        raise InsufficientPrecision(
            f"table carries {precision} significant digits, {min_precision} requested")
    if y_max < 2 or m < 1:
        raise CorruptTable("ymax must be >= 2 and m >= 1")

    expected = build_primes(y_max).primes
    primes: list[int] = []
    rows: list[np.ndarray] = []
    for line in lines:
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 3 or parts[0] != "prime":
            raise CorruptTable(f"expected 'prime <p> <count>', got {line.strip()!r}")
        p = _int(parts[1], "prime")
        count = _int(parts[2], "count")
        j = len(primes)
        if primes and p <= primes[-1]:
            raise CorruptTable(f"row for prime {p} is out of order (follows {primes[-1]})")
        if j >= len(expected) or p != expected[j]:
            raise CorruptTable(f"row {j + 1} is labelled {p}, expected the prime "
                               f"{int(expected[j]) if j < len(expected) else 'none'}")
        if count != min(m, j + 1) + 1:
            raise CorruptTable(f"row for prime {p} should hold {min(m, j + 1) + 1} coefficients, says {count}")
        text = [next(lines, None) for _ in range(count)]
        if any(t is None for t in text):
            raise CorruptTable(f"row for prime {p} is truncated")
        try:
            row = np.array([t.strip() for t in text], dtype=LD)
        except ValueError as exc:
            raise CorruptTable(f"row for prime {p}: {exc}") from None
        primes.append(p)
        rows.append(row)
    if len(primes) != len(expected):
        raise CorruptTable(f"file holds {len(primes)} rows, ymax={y_max} needs {len(expected)}")

    ps = np.array(primes, dtype=np.int64)
    half_logs = np.cumsum(np.log(ps.astype(LD))) / 2
    for p, row, d1 in zip(primes, rows, half_logs):
        if row[0] != 1:
            raise CorruptTable(f"d[0] of the row for prime {p} is {row[0]}, not 1")
        if not np.all(np.isfinite(row)):
            raise CorruptTable(f"row for prime {p} holds a non-finite coefficient")
        if abs(row[1] - d1) > D1_TOLERANCE * d1:
            raise CorruptTable(f"d[1] integrity check failed for prime {p}: "
                               f"stored {row[1]}, expected {d1}")
    ps.setflags(write=False)
    return EnnolaTable(y_max=y_max, m=m, primes=ps, rows=rows, precision=precision)


def save_rho(table: RhoTable, destination: Target) -> None:
    if table.u_max < 2:
        raise ValueError("only tables reaching u = 2 can be stored (rho(2) is the integrity check)")
    with _open(destination, "w") as fh:
        fh.write(f"{RHO_MAGIC} {VERSION}\n")
        fh.write(f"umax {_fmt(np.float64(table.u_max))}\nh {_fmt(np.float64(table.h))}\n")
        fh.write(f"values {len(table.values)}\n")
        fh.write("\n".join(_fmt(v) for v in table.values))
        fh.write("\n")


def load_rho(source: Target) -> RhoTable:
    """Read a rho table, validating layout and the segment on [0, 2]."""
    with _open(source, "r") as fh:
        lines = iter(fh.read().splitlines())
    first = next(lines, None)
    if first is None:
        raise CorruptTable("empty rho file")
    _check_header(first, RHO_MAGIC)
    try:
        u_max = float(_meta(lines, "umax"))
        h = float(_meta(lines, "h"))
    except ValueError as exc:
        raise CorruptTable(str(exc)) from None
    n = _int(_meta(lines, "values"), "values")
    if not (u_max >= 2 and 0 < h <= 1 / 64):
        raise CorruptTable(f"umax={u_max}, h={h} outside the supported range")
    per_unit = round(1 / h)
    if n != math.ceil(u_max * per_unit - 1e-9) + 1:
        raise CorruptTable(f"values count {n} does not match umax={u_max}, h={h}")
    text = [t.strip() for t in lines if t.strip()]
    if len(text) != n:
        raise CorruptTable(f"expected {n} values, found {len(text)}")
    try:
        values = np.array(text, dtype=np.float64)
    except ValueError as exc:
        raise CorruptTable(str(exc)) from None
    if not np.all(np.isfinite(values)):
        raise CorruptTable("rho table holds a non-finite value")

    head = build_rho(2.0, h).values
    if not np.array_equal(values[:len(head)], head):
        bad = int(np.flatnonzero(values[:len(head)] != head)[0])
        raise CorruptTable(f"rho integrity check failed at u={bad * h}")
    rho2 = math.exp(values[2 * per_unit])
    if abs(rho2 - (1 - math.log(2))) > RHO2_TOLERANCE:
        raise CorruptTable(f"rho(2) is {rho2}, expected 1 - log 2")
    values.setflags(write=False)
    return RhoTable(u_max=u_max, h=h, values=values, gamma=GAMMA)

