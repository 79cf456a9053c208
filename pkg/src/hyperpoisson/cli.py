"""Command-line interface: ``hyperpoisson {eval,validate,mc,asymptote,zeros}``.

Exit status: 0 on success, 1 on a failed check or numerical failure, 2 on
invalid arguments.  Floats are written with 17 significant digits so every
number round-trips exactly.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import analysis
from .hyperbolic_bm import (
    THREADS_ENV,
    McConfig,
    default_threads,
    mc_char_fn,
    mc_radial_density,
    simulate_exits,
)
from .kernel import fourier_transform, kernel_values
from .validation import DEFAULT_GROUPS, GROUPS, run_suite
from .wfun import Geometry
from .zeros import find_zeros

EVAL_COLUMNS = ("n", "a", "x", "rho", "value", "method", "err_estimate")
Z_ALARM = 4.0


class UsageError(Exception):
    """Bad argument values detected after parsing (exit status 2)."""


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def parse_grid(spec: str) -> list[float]:
    """``lo:step:hi``, endpoints inclusive within half a step."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like lo:step:hi, got {spec!r}")
    try:
        lo, step, hi = (float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"grid must look like lo:step:hi, got {spec!r}") from exc
    if not all(math.isfinite(v) for v in (lo, step, hi)) or step <= 0 or hi < lo:
        raise UsageError(f"grid needs finite lo <= hi and step > 0, got {spec!r}")
    count = int(math.floor((hi - lo) / step + 0.5)) + 1
    if count > 10**6:
        raise UsageError("grid has more than 10^6 points")
    return [float(np.round(lo + i * step, 12)) for i in range(count)]


def parse_floats(spec: str) -> list[float]:
    try:
        vals = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {spec!r}") from exc
    if not vals:
        raise UsageError("empty list")
    return vals


def _geometry(args) -> Geometry:
    try:
        return Geometry(args.n, args.a, args.x)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


# --- subcommands -------------------------------------------------------------


def cmd_eval(args) -> int:
    g = _geometry(args)
    if args.rho_grid is not None:
        rhos = parse_grid(args.rho_grid)
    elif args.rho is not None:
        rhos = [args.rho]
    else:
        raise UsageError("give --rho or --rho-grid")
    if any(r < 0 for r in rhos):
        raise UsageError("rho must be nonnegative")
    if args.method == "closed" and g.n not in (2, 3, 4, 6):
        raise UsageError("closed forms exist for n in {3, 4, 6}")
    values = kernel_values(g, rhos, args.method)
    rows = [
        {"n": g.n, "a": g.a, "x": g.x, "rho": r, "value": kv.value, "method": kv.method,
         "err_estimate": kv.err_estimate}
        for r, kv in zip(rhos, values)
    ]
    if not all(math.isfinite(row["value"]) for row in rows):
        print("error: non-finite kernel value", file=sys.stderr)
        return 1
    out = _open_out(args.output)
    try:
        if args.format == "json":
            json.dump(rows, out, indent=1)
            out.write("\n")
        else:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(EVAL_COLUMNS)
            for row in rows:
                writer.writerow([fmt(row[c]) for c in EVAL_COLUMNS])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_validate(args) -> int:
    groups = tuple(args.only.split(",")) if args.only else DEFAULT_GROUPS
    unknown = [g for g in groups if g not in GROUPS]
    if unknown:
        raise UsageError(f"unknown check group(s): {', '.join(unknown)}; "
                         f"choose from {', '.join(GROUPS)}")
    ns = [int(v) for v in parse_floats(args.n)] if args.n else [3, 4, 5, 6]
    if any(n < 3 for n in ns):
        raise UsageError("validation dimensions must be >= 3")

    def show(res):
        print(f"{res.status} {res.name} measured={fmt(res.measured)} "
              f"threshold={fmt(res.threshold)} ({res.runtime:.2f}s)", flush=True)

    results = run_suite(groups, ns, on_result=None if args.quiet else show)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.as_record() for r in results], fh, indent=1)
            fh.write("\n")
    failed = sum(r.status == "FAIL" for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_mc(args) -> int:
    if args.validate and args.seed is None:
        raise UsageError("--seed is mandatory with --validate")
    g = _geometry(args)
    if args.paths < 1 or not args.dt > 0:
        raise UsageError("--paths must be >= 1 and --dt > 0")
    seed = 0 if args.seed is None else args.seed
    cfg = McConfig(g, dt=args.dt, n_paths=args.paths, seed=seed,
                   bridge_correction=not args.no_bridge)
    start = time.perf_counter()
    samples = simulate_exits(cfg, threads=args.threads)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    worst = 0.0
    if args.hist:
        if args.bins < 1 or not args.rmax > 0:
            raise UsageError("--bins must be >= 1 and --rmax > 0")
        edges = np.linspace(0.0, args.rmax, args.bins + 1)
        ests = mc_radial_density(cfg, edges, samples)
        method = "closed" if g.n in (3, 4, 6) else "representation"
        masses = analysis.bin_masses(g, edges, method)
        writer.writerow(("bin_lo", "bin_hi", "mc_mass", "std_err", "analytic_mass", "z"))
        for lo, hi, est, mass in zip(edges[:-1], edges[1:], ests, masses):
            width = hi - lo
            z = (est.value * width - mass) / (est.std_err * width)
            worst = max(worst, abs(z))
            writer.writerow([fmt(lo), fmt(hi), fmt(est.value * width), fmt(est.std_err * width),
                             fmt(mass), fmt(z)])
    else:
        us = parse_floats(args.u)
        if any(u < 0 for u in us):
            raise UsageError("--u values must be nonnegative")
        writer.writerow(("u", "mc_value", "std_err", "exact", "z"))
        for u in us:
            est = mc_char_fn(cfg, u, samples)
            exact = float(fourier_transform(g, u))
            z = (est.value - exact) / est.std_err if est.std_err > 0 else 0.0
            worst = max(worst, abs(z))
            writer.writerow([fmt(u), fmt(est.value), fmt(est.std_err), fmt(exact), fmt(z)])
    print(f"# paths={cfg.n_paths} dt={fmt(cfg.dt)} seed={seed} max|z|={worst:.3f} "
          f"time={time.perf_counter() - start:.1f}s", file=sys.stderr)
    if worst > Z_ALARM:
        print(f"error: |z| = {worst:.2f} exceeds {Z_ALARM:g}; probable bug", file=sys.stderr)
        return 1
    return 0


def cmd_asymptote(args) -> int:
    th = analysis.DEFAULTS
    if args.regime == "rho":
        fit = analysis.slope_rho_infinity(_geometry(args))
    elif args.regime == "x":
        fit = analysis.slope_x_infinity(args.n, args.a, args.rho)
    elif args.regime == "blowup":
        fit = analysis.boundary_blowup(args.a, args.n)
    else:
        if not args.rho > 0:
            raise UsageError("the linear regime needs --rho > 0")
        lin = analysis.boundary_linear(args.n, args.a, args.rho)
        ok = lin["spread"] <= th.linear_spread
        print("regime,spread,limit,limit_rel_diff,status")
        print(",".join([args.regime, fmt(lin["spread"]), fmt(lin["limit"]),
                        fmt(lin["limit_rel_diff"]), "PASS" if ok else "FAIL"]))
        return 0 if ok else 1
    ok = fit.passed()
    if args.regime == "blowup":
        ok = ok and abs(fit.constant / analysis.blowup_constant(args.n) - 1) <= th.blowup_rel
    print("regime,exponent,expected,intercept,r_squared,window_lo,window_hi,constant,status")
    print(",".join([args.regime, fmt(fit.exponent), fmt(fit.expected), fmt(fit.intercept),
                    fmt(fit.r_squared), fmt(fit.window[0]), fmt(fit.window[1]),
                    "" if fit.constant is None else fmt(fit.constant),
                    "PASS" if ok else "FAIL"]))
    return 0 if ok else 1


def cmd_zeros(args) -> int:
    if args.n < 3:
        raise UsageError("--n must be >= 3")
    zs = find_zeros(args.n)
    print("index,re,im")
    for i, z in enumerate(zs):
        print(f"{i},{fmt(z.real)},{fmt(z.imag)}")
    print(f"# n={args.n} count={len(zs)} residual={fmt(zs.residual)}", file=sys.stderr)
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hyperpoisson",
        description="Poisson kernel of a half-space for hyperbolic Brownian motion.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def geom(sp, n=4, a=1.0, x=2.0):
        sp.add_argument("--n", type=int, default=n, help="dimension of H^n")
        sp.add_argument("--a", type=float, default=a, help="boundary height")
        sp.add_argument("--x", type=float, default=x, help="start height (> a)")

    e = sub.add_parser("eval", help="evaluate P_a(x, rho)")
    geom(e)
    grp = e.add_mutually_exclusive_group()
    grp.add_argument("--rho", type=float)
    grp.add_argument("--rho-grid", metavar="LO:STEP:HI")
    e.add_argument("--method", choices=("representation", "rep", "hankel", "closed"),
                   default="representation")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("validate", help="run the property suite")
    v.add_argument("--only", help=f"comma-separated groups from: {', '.join(GROUPS)}")
    v.add_argument("--n", help="comma-separated dimensions (default 3,4,5,6)")
    v.add_argument("--json", help="write the report to this file")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_validate)

    m = sub.add_parser("mc", help="Monte Carlo comparison")
    geom(m)
    m.add_argument("--paths", type=int, default=100_000)
    m.add_argument("--dt", type=float, default=1e-4)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--u", default="0.5,1,2", help="comma-separated |u| values")
    m.add_argument("--hist", action="store_true", help="radial histogram instead of |u| table")
    m.add_argument("--bins", type=int, default=20)
    m.add_argument("--rmax", type=float, default=6.0)
    m.add_argument("--no-bridge", action="store_true", help="disable the bridge correction")
    m.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    m.add_argument("--validate", action="store_true", help="validation mode (requires --seed)")
    m.set_defaults(func=cmd_mc)

    a = sub.add_parser("asymptote", help="fit an asymptotic power law")
    geom(a)
    a.add_argument("--rho", type=float, default=1.0)
    a.add_argument("--regime", choices=("rho", "x", "blowup", "linear"), default="rho")
    a.set_defaults(func=cmd_asymptote)

    z = sub.add_parser("zeros", help="print the zeros of K_{(n-1)/2}")
    z.add_argument("--n", type=int, required=True)
    z.set_defaults(func=cmd_zeros)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "threads", None) is None and args.command == "mc":
            args.threads = default_threads()
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
