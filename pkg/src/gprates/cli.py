"""Command-line front end.

Commands
--------
family-info   derived tail parameters and |A(v)| probes for a family
distance      divergence panel at a single threshold
sweep         threshold sweep with log-log rate fits (CSV or JSON)
mc-check      Monte Carlo cross-check of the quadrature distances
verify        acceptance suites (core | rates | mc | all)

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical failure.  Every command is deterministic given its full
flag set (including --seed); output goes to stdout unless --out is
given, and nothing is written outside the --out path.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .acceptance import SUITES, run_suite
from .distances import METRIC_NAMES, compute_report, hellinger_sq, normalize_metrics, total_variation
from .errors import (DegenerateRateError, DomainError, GpratesError,
                     QuadratureError, SweepError, UsageError)
from .excess import make_excess
from .families import parse_family_spec
from .limit_models import GpModel
from .montecarlo import mc_hellinger_sq, mc_tv, substream_seed
from .rates import (CSV_COLUMNS, GridPoint, SweepResult, _fmt, _point_row,
                    sweep, sweep_to_csv, sweep_to_jsonable)

DEFAULT_SEED = 1234
DEFAULT_MC_N = 1_000_000


def _parse_v_grid(spec: str):
    """Parse start:stop:spacing:count, e.g. 1e2:1e6:log:9."""
    parts = spec.split(":")
    if len(parts) != 4:
        raise UsageError("v-grid must be start:stop:spacing:count, e.g. 1e2:1e6:log:9")
    start_s, stop_s, spacing, count_s = parts
    try:
        start, stop = float(start_s), float(stop_s)
        count = int(count_s)
    except ValueError as exc:
        raise UsageError(f"bad v-grid value in {spec!r}") from exc
    if spacing not in ("log", "lin"):
        raise UsageError("v-grid spacing must be 'log' or 'lin'")
    if count < 2 or start <= 1.0 or stop <= start:
        raise UsageError("v-grid needs 1 < start < stop and count >= 2")
    if spacing == "log":
        return [float(v) for v in np.logspace(math.log10(start), math.log10(stop), count)]
    return [float(v) for v in np.linspace(start, stop, count)]


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def cmd_family_info(args) -> int:
    fam = parse_family_spec(args.family)
    probes = {f"{v:g}": _jsonable(abs(float(fam.rate_A(v))))
              for v in (1e2, 1e4, 1e6)}
    info = {
        "family": fam.spec_string(),
        "gamma": fam.gamma,
        "rho": fam.rho,
        "xstar": _jsonable(float(fam.xstar)),
        "degenerate_rate": bool(fam.degenerate_rate),
        "abs_A": probes,
    }
    _emit(json.dumps(info, indent=2) + "\n", args.out)
    return 0


def _single_point(args):
    fam = parse_family_spec(args.family)
    metrics = normalize_metrics(args.metrics.split(","))
    m = make_excess(fam, args.v, args.recenter)
    report = compute_report(m, GpModel(fam.gamma), args.v, m.recentered, metrics)
    point = GridPoint(v=m.v, t=m.t, s_t=m.s_t, c_t=m.c_t,
                      abs_A=abs(float(fam.rate_A(m.v))), report=report)
    return fam, m, point


def cmd_distance(args) -> int:
    fam, m, point = _single_point(args)
    if args.format == "csv":
        text = ",".join(CSV_COLUMNS) + "\n" + \
            ",".join(_fmt(x) for x in _point_row(point)) + "\n"
    else:
        sr = SweepResult(family_spec=fam.spec_string(), gamma=fam.gamma,
                         recentered=m.recentered, grid=[point])
        text = json.dumps(sweep_to_jsonable(sr), indent=2) + "\n"
    _emit(text, args.out)
    return 0


def cmd_sweep(args) -> int:
    fam = parse_family_spec(args.family)
    metrics = normalize_metrics(args.metrics.split(","))
    grid = _parse_v_grid(args.v_grid)
    sr = sweep(fam, grid, recenter=args.recenter, metrics=metrics,
               with_ratio_sup=True, jobs=args.jobs)
    if args.format == "csv":
        text = sweep_to_csv(sr)
    else:
        text = json.dumps(sweep_to_jsonable(sr), indent=2) + "\n"
    _emit(text, args.out)
    return 0


def cmd_mc_check(args) -> int:
    fam = parse_family_spec(args.family)
    m = make_excess(fam, args.v, args.recenter)
    q = GpModel(fam.gamma)
    qh2, _ = hellinger_sq(m, q)
    qtv, _ = total_variation(m, q)
    est_h2 = mc_hellinger_sq(m, args.n, substream_seed(args.seed, 0))
    est_tv = mc_tv(m, args.n, substream_seed(args.seed, 16))
    payload = {
        "family": fam.spec_string(), "v": m.v, "recentered": m.recentered,
        "n": args.n, "seed": args.seed,
        "h2": {"quad": qh2, "mc": est_h2.value, "std_error": est_h2.std_error,
               "z": abs(qh2 - est_h2.value) / est_h2.std_error},
        "tv": {"quad": qtv, "mc": est_tv.value, "std_error": est_tv.std_error,
               "z": abs(qtv - est_tv.value) / est_tv.std_error},
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    _, all_passed = run_suite(args.suite, jobs=args.jobs, out_dir=args.out)
    return 0 if all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gprates",
        description="Exact excess-over-threshold densities, their divergences "
                    "from the generalised Pareto limit, and convergence-rate "
                    "verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_family(p):
        p.add_argument("--family", required=True,
                       help="family spec: burr:c=2,k=1 | revburr:c=1,k=1,xstar=0 "
                            "| gumbel | gp:gamma=0.5")

    def add_common(p):
        p.add_argument("--recenter", choices=("on", "off", "auto"), default="auto")
        p.add_argument("--metrics", default="h2,tv,kl,d2,d3",
                       help=f"comma list from {','.join(METRIC_NAMES)}")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("family-info", help="derived parameters and |A(v)| probes")
    add_family(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_family_info)

    p = sub.add_parser("distance", help="divergence panel at one threshold")
    add_family(p)
    p.add_argument("--v", type=float, required=True, help="v = 1/(1 - F(t)) > 1")
    add_common(p)
    p.set_defaults(fn=cmd_distance)

    p = sub.add_parser(
        "sweep", help="threshold sweep and rate fits",
        epilog="CSV columns: " + ",".join(CSV_COLUMNS))
    add_family(p)
    p.add_argument("--v-grid", dest="v_grid", default="1e2:1e6:log:9",
                   help="start:stop:spacing:count (spacing: log|lin)")
    add_common(p)
    p.set_defaults(format="csv")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel grid-point workers (result independent of count)")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("mc-check", help="Monte Carlo cross-check at one threshold")
    add_family(p)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--recenter", choices=("on", "off", "auto"), default="auto")
    p.add_argument("--n", type=int, default=DEFAULT_MC_N)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_mc_check)

    p = sub.add_parser("verify", help="run acceptance suites")
    p.add_argument("suite", nargs="?", choices=sorted(SUITES), default="all")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None, help="directory for CSV/JSON artifacts")
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors and 0 for --help
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, SweepError, DegenerateRateError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except GpratesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
