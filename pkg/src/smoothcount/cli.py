"""Command line: estimate, precompute, grid and compare.

Exit codes: 0 success, 2 missing precomputation, 3 resource limit, 64 usage.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import api, dickman, ennola, store
from .errors import (BudgetExceeded, CorruptTable, InsufficientPrecision, NeedsPrecompute,
                     OutOfRange, ResourceError, SmoothCountError)
from .selector import SelectorPolicy, recommend

EXIT_OK = 0
EXIT_NEEDS_PRECOMPUTE = 2
EXIT_RESOURCE = 3
EXIT_USAGE = 64

GRID_HEADER = ["log2x", "log2y", "method", "value_log", "seconds", "alpha", "iterations"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_POWER = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*$")


def parse_int(text: str) -> int:
    """An integer written plainly or as b^k."""
    m = _POWER.match(text)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or b^k, got {text!r}") from None


def parse_log2(text: str) -> float:
    """A power of two as 2^a (a may be fractional); returns a."""
    text = text.strip()
    if text.startswith("2^"):
        try:
            return float(text[2:])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected 2^a, got {text!r}")


def parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected 2^a..2^b, got {text!r}")
    a, b = parse_log2(lo), parse_log2(hi)
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def parse_methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in api.METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {','.join(api.METHODS)}")
    return methods


def _fmt_number(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _fmt_log2(a: float) -> str:
    return format(a, "g")


def _report(est) -> dict:
    """Fields printed for an estimate, in display order; timing is left out so output is reproducible."""
    out = {"value": est.value, "method": est.method}
    if est.overflowed:
        out["log_value"] = est.log_value
    for key, val in est.diagnostics.items():
        if key != "seconds":
            out[key] = val
    return out


def _load_tables(args) -> tuple[Optional[ennola.EnnolaTable], Optional[dickman.RhoTable]]:
    dtable = store.load_dtable(args.dtable) if getattr(args, "dtable", None) else None
    rho = store.load_rho(args.rho) if getattr(args, "rho", None) else None
    return dtable, rho


def cmd_estimate(args) -> int:
    dtable, rho = _load_tables(args)
    if args.method == "ennola" and dtable is None:
        raise NeedsPrecompute("method ennola needs --dtable; create one with "
                              "'smoothcount precompute --ymax <y> --out <file>'")
    policy = SelectorPolicy.from_file(args.policy) if args.policy else None
    est = api.estimate(args.x, args.y, args.method, dtable=dtable, rho=rho, policy=policy)
    fields = _report(est)
    if args.json:
        print(json.dumps({k: (None if v is None else v) for k, v in fields.items()}, default=float))
    else:
        value = "inf" if fields["value"] is None else _fmt_number(fields["value"])
        rest = " ".join(f"{k}={_fmt_number(v)}" for k, v in fields.items() if k not in ("value", "method"))
        print(f"{value} {fields['method']}" + (f" {rest}" if rest else ""))
    return EXIT_OK


def cmd_precompute(args) -> int:
    start = time.perf_counter()
    if args.rho:
        if args.umax is None:
            raise UsageError("--rho needs --umax")
        table = dickman.build_rho(args.umax, args.h)
        store.save_rho(table, args.out)
        print(f"rho values={len(table.values)} umax={_fmt_number(table.u_max)} "
              f"seconds={time.perf_counter() - start:.6f}")
        return EXIT_OK
    if args.ymax is None:
        raise UsageError("precompute needs --ymax (or --rho --umax)")
    if args.ymax < 2:
        raise UsageError("--ymax must be >= 2")
    kwargs = {"mem_cap": args.mem_cap} if args.mem_cap is not None else {}
    table = ennola.precompute_dtable(api.primes_upto(args.ymax), args.ymax, args.m, **kwargs)
    store.save_dtable(table, args.out)
    print(f"rows={len(table.rows)} m={table.m} seconds={time.perf_counter() - start:.6f}")
    return EXIT_OK


def _steps(lo: float, hi: float, step: float) -> list[float]:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(n + 1)]


def _pow2(a: float) -> int:
    return 2 ** int(a) if float(a).is_integer() else int(round(2.0 ** a))


def cmd_grid(args) -> int:
    if args.step_log2 <= 0:
        raise UsageError("--step-log2 must be positive")
    dtable, rho = _load_tables(args)
    cells = [(a, b) for a in _steps(*args.x_range, args.step_log2)
             for b in _steps(*args.y_range, args.step_log2) if b <= a and b >= 1]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    if args.recommend:
        policy = SelectorPolicy.from_file(args.policy) if args.policy else SelectorPolicy()
        writer.writerow(["log2x", "log2y", "method"])
        ymax = dtable.y_max if dtable is not None else None
        for a, b in sorted(cells):
            label = recommend(a * math.log(2), _pow2(b), policy, dtable_ymax=ymax)
            writer.writerow([_fmt_log2(a), _fmt_log2(b), label])
        return EXIT_OK
    methods = args.methods or ["htalpha"]
    if rho is None and "dickman" in methods:
        rho = api.default_rho()  # built once, outside the timed cells
    rows = []
    for a, b in cells:
        for method in methods:
            start = time.perf_counter()
            try:
                est = api.estimate(_pow2(a), _pow2(b), method, dtable=dtable, rho=rho)
                seconds = time.perf_counter() - start
                alpha = est.diagnostics.get("alpha")
                its = est.diagnostics.get("iterations")
                row = [a, b, method, _fmt_number(est.log_value), f"{seconds:.6f}",
                       "" if alpha is None else _fmt_number(alpha), "" if its is None else str(its)]
            except (SmoothCountError, ArithmeticError, ValueError, MemoryError) as exc:
                seconds = time.perf_counter() - start
                row = [a, b, method, "", f"{seconds:.6f}", "", f"error:{type(exc).__name__}"]
            rows.append(row)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    writer.writerow(GRID_HEADER)
    for r in rows:
        writer.writerow([_fmt_log2(r[0]), _fmt_log2(r[1])] + r[2:])
    return EXIT_OK


def cmd_compare(args) -> int:
    dtable, rho = _load_tables(args)
    baseline = args.baseline
    if baseline == "auto":
        try:
            base = api.exact_estimate(args.x, args.y)
            baseline = "buchstab"
        except (BudgetExceeded, ResourceError):
            baseline = "ht"
            base = api.estimate(args.x, args.y, "ht")
    else:
        base = api.estimate(args.x, args.y, baseline)
    print(f"baseline {baseline} log_value={_fmt_number(base.log_value)} "
          f"seconds={base.diagnostics.get('seconds', 0.0):.6f}")
    methods = args.methods or [m for m in api.METHODS
                               if m != baseline and (m != "ennola" or dtable is not None)]
    if rho is None and "dickman" in methods:
        rho = api.default_rho()
    for method in methods:
        start = time.perf_counter()
        try:
            est = api.estimate(args.x, args.y, method, dtable=dtable, rho=rho)
        except (SmoothCountError, ArithmeticError, ValueError, MemoryError) as exc:
            print(f"{method} error:{type(exc).__name__} {exc}")
            continue
        seconds = time.perf_counter() - start
        print(f"{method} ratio={est.ratio_to(base):.6f} seconds={seconds:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smoothcount", description="Count and estimate y-smooth integers up to x.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate Psi(x, y)")
    est.add_argument("--x", type=parse_int, required=True)
    est.add_argument("--y", type=parse_int, required=True)
    est.add_argument("--method", default="auto", choices=("auto",) + api.METHODS)
    est.add_argument("--dtable", help="coefficient table written by precompute")
    est.add_argument("--rho", help="rho table written by precompute --rho")
    est.add_argument("--policy", help="selector policy file (key = value lines)")
    est.add_argument("--json", action="store_true")
    est.set_defaults(func=cmd_estimate)

    pre = sub.add_parser("precompute", help="build and save a coefficient or rho table")
    pre.add_argument("--ymax", type=parse_int)
    pre.add_argument("--m", type=int)
    pre.add_argument("--mem-cap", type=parse_int, help="refuse tables larger than this many bytes")
    pre.add_argument("--rho", action="store_true", help="build a Dickman rho table instead")
    pre.add_argument("--umax", type=float)
    pre.add_argument("--h", type=float, default=dickman.DEFAULT_H)
    pre.add_argument("--out", required=True)
    pre.set_defaults(func=cmd_precompute)

    grid = sub.add_parser("grid", help="CSV sweep over a log2 grid")
    grid.add_argument("--x-range", type=parse_range, required=True)
    grid.add_argument("--y-range", type=parse_range, required=True)
    grid.add_argument("--step-log2", type=float, default=1.0)
    grid.add_argument("--methods", type=parse_methods)
    grid.add_argument("--recommend", action="store_true", help="emit the selector's choice per cell")
    grid.add_argument("--policy")
    grid.add_argument("--dtable")
    grid.add_argument("--rho")
    grid.set_defaults(func=cmd_grid)

    cmp_ = sub.add_parser("compare", help="ratio of each method to a baseline")
    cmp_.add_argument("--x", type=parse_int, required=True)
    cmp_.add_argument("--y", type=parse_int, required=True)
    cmp_.add_argument("--baseline", default="auto", choices=("auto", "buchstab", "ht"))
    cmp_.add_argument("--methods", type=parse_methods)
    cmp_.add_argument("--dtable")
    cmp_.add_argument("--rho")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"smoothcount: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NeedsPrecompute, OutOfRange) as exc:
        print(f"smoothcount: {exc}", file=sys.stderr)
        if isinstance(exc, OutOfRange):
            print("smoothcount: extend the table with 'smoothcount precompute --rho --umax <u>'",
                  file=sys.stderr)
        return EXIT_NEEDS_PRECOMPUTE
    except (ResourceError, BudgetExceeded, MemoryError) as exc:
        print(f"smoothcount: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CorruptTable, InsufficientPrecision) as exc:
        print(f"smoothcount: bad table: {exc}", file=sys.stderr)
        return EXIT_NEEDS_PRECOMPUTE
    except OSError as exc:
        print(f"smoothcount: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
