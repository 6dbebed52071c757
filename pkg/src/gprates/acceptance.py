"""Acceptance suite: every verification criterion as a callable check.

The criteria are grouped into suites (``core``, ``rates``, ``mc``,
``all``) used both by the ``verify`` CLI command and by the test
module.  Sweeps shared between criteria are computed once per context;
all Monte Carlo seeds are fixed constants so the whole suite is
deterministic, and the serialisation bundle is rebuilt from scratch
twice for the determinism criterion.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .distances import compute_report, hellinger_sq, total_variation
from .excess import density_ratio_sup, eta_diag, excess_at_threshold, make_excess
from .families import parse_family_spec, von_mises_ratio
from .limit_models import GpModel
from .montecarlo import mc_hellinger_sq, mc_tv, substream_seed
from .rates import (check_kl_corollary, check_prop1, check_sandwich,
                    check_theorem1, sweep, sweep_to_csv, sweep_to_jsonable)

BASE_SEED = 20260810
MC_N = 1_000_000

#: sweep configurations exercised by the rate criteria
SWEEP_CONFIGS = (
    ("burr:c=2,k=1", "auto"),
    ("gumbel", "auto"),
    ("revburr:c=1,k=1,xstar=0", "off"),
    ("revburr:c=1,k=1,xstar=0", "on"),
    ("revburr:c=1,k=4,xstar=0", "off"),
    ("revburr:c=1,k=4,xstar=0", "on"),
)

#: (family spec, recenter) x v for the Monte Carlo oracle criterion
MC_FAMILIES = (
    ("burr:c=2,k=1", "auto"),
    ("revburr:c=1,k=1,xstar=0", "on"),
    ("revburr:c=1,k=1,xstar=0", "off"),
    ("revburr:c=1,k=4,xstar=0", "on"),
    ("gumbel", "auto"),
)
MC_V_VALUES = (1e2, 1e3, 3e3, 1e4)


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  #{self.cid:<2d} {self.name:<28s} ({self.seconds:6.2f}s)  {self.details}"


class AcceptanceContext:
    """Caches the acceptance sweeps; criteria draw from the same grid."""

    def __init__(self, jobs: int = 1):
        self.jobs = jobs
        self._sweeps = {}

    def sweep(self, spec: str, recenter: str):
        key = (spec, recenter)
        if key not in self._sweeps:
            fam = parse_family_spec(spec)
            self._sweeps[key] = sweep(fam, recenter=recenter,
                                      with_ratio_sup=True, jobs=self.jobs)
        return self._sweeps[key]


def _timed(fn):
    def wrapper(ctx):
        start = time.monotonic()
        passed, details = fn(ctx)
        return passed, details, time.monotonic() - start
    wrapper.__name__ = fn.__name__
    return wrapper


@_timed
def _c1_exact_baseline(ctx):
    worst = 0.0
    for g in (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0):
        fam = parse_family_spec(f"gp:gamma={g}")
        q = GpModel(g)
        for v in (1e2, 1e4, 1e6):
            m = make_excess(fam, v)
            rep = compute_report(m, q, v, m.recentered, metrics=("h2", "tv", "kl"))
            worst = max(worst, rep.hellinger_sq, rep.tv, rep.kl)
    return worst <= 1e-10, f"max(H2, TV, KL) over 18 configs = {worst:.2e}"


@_timed
def _c2_sandwich(ctx):
    bad = []
    for spec, recenter in SWEEP_CONFIGS:
        verdict = check_sandwich(ctx.sweep(spec, recenter))
        if not verdict.passed:
            bad.append(f"{spec} ({recenter}): {verdict.details}")
    if bad:
        return False, "; ".join(bad)
    return True, f"H^2 <= 2TV <= 2H on all {len(SWEEP_CONFIGS)} sweeps"


def _slope_of(ctx, spec, recenter, metric="h"):
    return ctx.sweep(spec, recenter).fitted[metric]


@_timed
def _c3_burr_rate(ctx):
    fit = _slope_of(ctx, "burr:c=2,k=1", "auto")
    ok = abs(fit.slope - 1.0) <= 0.1 and fit.r_squared >= 0.999
    return ok, f"H slope {fit.slope:.4f} (want 1.0 +/- 0.1), R^2 {fit.r_squared:.6f}"


@_timed
def _c4_gumbel(ctx):
    fit = _slope_of(ctx, "gumbel", "auto")
    m = excess_at_threshold(parse_family_spec("gumbel"), 2.0)
    sup = density_ratio_sup(m)
    bound = math.exp(math.exp(-2.0)) + 1e-6
    ok = abs(fit.slope - 1.0) <= 0.1 and sup <= bound
    return ok, f"H slope {fit.slope:.4f}; ratio sup at t=2: {sup:.6f} <= {bound:.6f}"


@_timed
def _c5_degraded(ctx):
    fit = _slope_of(ctx, "revburr:c=1,k=1,xstar=0", "off")
    ok = abs(fit.slope - 0.5) <= 0.1
    return ok, f"H slope without recentering {fit.slope:.4f} (want 0.5 +/- 0.1)"


@_timed
def _c6_repair(ctx):
    fit = _slope_of(ctx, "revburr:c=1,k=1,xstar=0", "on")
    off = ctx.sweep("revburr:c=1,k=1,xstar=0", "off")
    on = ctx.sweep("revburr:c=1,k=1,xstar=0", "on")
    strict = True
    for g_off, g_on in zip(off.grid, on.grid):
        if g_off.v >= 1e3 and not (g_on.report.hellinger < g_off.report.hellinger):
            strict = False
    ok = abs(fit.slope - 1.0) <= 0.1 and strict
    return ok, (f"H slope with recentering {fit.slope:.4f}; "
                f"H(l~) < H(l) pointwise for v >= 1e3: {strict}")


@_timed
def _c7_no_degradation(ctx):
    fit = _slope_of(ctx, "revburr:c=1,k=4,xstar=0", "off")
    ok = fit.slope >= 0.9
    return ok, f"H slope {fit.slope:.4f} (want >= 0.9) for gamma = -0.25 unrecentered"


@_timed
def _c8_shift_sandwich(ctx):
    details = []
    ok = True
    for spec in ("revburr:c=1,k=1,xstar=0", "revburr:c=1,k=4,xstar=0"):
        fam = parse_family_spec(spec)
        sr = ctx.sweep(spec, "on")
        pairs = [(float(fam.mu_v(g.v)), g.abs_A) for g in sr.grid if not g.failed]
        verdict = check_prop1(fam.gamma, pairs)
        ok = ok and verdict.passed
        details.append(f"gamma={fam.gamma:g}: {verdict.details}")
    return ok, "; ".join(details)


@_timed
def _c9_kl_corollary(ctx):
    details = []
    ok = True
    for spec, recenter in (("burr:c=2,k=1", "auto"),
                           ("revburr:c=1,k=1,xstar=0", "on")):
        verdict = check_kl_corollary(ctx.sweep(spec, recenter))
        ok = ok and verdict.passed
        details.append(f"{spec}: {verdict.details}")
    return ok, "; ".join(details)


def mc_comparison_rows(jobs: int = 1):
    """The 20 fixed Monte Carlo oracle comparisons (quadrature vs sampling)."""
    rows = []
    idx = 0
    for spec, recenter in MC_FAMILIES:
        fam = parse_family_spec(spec)
        for v in MC_V_VALUES:
            m = make_excess(fam, v, recenter)
            q = GpModel(fam.gamma)
            qh2, _ = hellinger_sq(m, q)
            qtv, _ = total_variation(m, q)
            # Stride 32 > 2 * N_SHARDS so the shard substreams of distinct
            # estimates never overlap.
            est_h2 = mc_hellinger_sq(m, MC_N, substream_seed(BASE_SEED, 32 * idx))
            est_tv = mc_tv(m, MC_N, substream_seed(BASE_SEED, 32 * idx + 16))
            rows.append({
                "family": spec, "recenter": recenter, "v": v, "n": MC_N,
                "h2": {"quad": qh2, "mc": est_h2.value, "std_error": est_h2.std_error,
                       "seed": est_h2.seed,
                       "z": abs(qh2 - est_h2.value) / est_h2.std_error},
                "tv": {"quad": qtv, "mc": est_tv.value, "std_error": est_tv.std_error,
                       "seed": est_tv.seed,
                       "z": abs(qtv - est_tv.value) / est_tv.std_error},
            })
            idx += 1
    return rows


@_timed
def _c10_mc_oracle(ctx):
    rows = mc_comparison_rows(ctx.jobs)
    worst = max(max(r["h2"]["z"], r["tv"]["z"]) for r in rows)
    ok = worst <= 3.0
    return ok, f"20 configs, max |quad - mc| = {worst:.2f} std errors (want <= 3)"


@_timed
def _c11_von_mises(ctx):
    burr = parse_family_spec("burr:c=2,k=1")
    revb = parse_family_spec("revburr:c=1,k=1,xstar=0")
    a = abs(von_mises_ratio(burr, 1e4) - 2.0)
    b = abs(von_mises_ratio(revb, -1e-4) - 1.0)
    c = abs(eta_diag(burr, 10.0) - 19.0 / 101.0)
    ok = a <= 1e-3 and b <= 1e-3 and c <= 1e-12
    return ok, (f"|xf/(1-F) - 2| = {a:.2e}; |(x*-x)f/(1-F) - 1| = {b:.2e}; "
                f"|eta(10) - 19/101| = {c:.2e}")


def build_artifacts(jobs: int = 1) -> dict:
    """Deterministic CSV/JSON artifact bundle (filename -> text)."""
    ctx = AcceptanceContext(jobs=jobs)
    files = {}
    for spec, recenter in SWEEP_CONFIGS:
        sr = ctx.sweep(spec, recenter)
        stem = spec.replace(":", "_").replace(",", "_").replace("=", "") \
            + f"_{recenter}"
        files[f"sweep_{stem}.csv"] = sweep_to_csv(sr)
        files[f"sweep_{stem}.json"] = json.dumps(sweep_to_jsonable(sr), indent=2) + "\n"
    files["mc_checks.json"] = json.dumps(mc_comparison_rows(jobs), indent=2) + "\n"
    return files


@_timed
def _c12_determinism(ctx):
    start = time.monotonic()
    first = build_artifacts(ctx.jobs)
    second = build_artifacts(ctx.jobs)
    same = set(first) == set(second) and all(first[k] == second[k] for k in first)
    elapsed = time.monotonic() - start
    ok = same and elapsed < 600.0
    return ok, (f"two rebuilds of {len(first)} CSV/JSON artifacts byte-identical: "
                f"{same}; rebuild time {elapsed:.1f}s (< 600s)")


#: criterion id -> (name, runner, runtime limit seconds or None)
CRITERIA = {
    1: ("exact-baseline", _c1_exact_baseline, 5.0),
    2: ("hellinger-tv-sandwich", _c2_sandwich, 120.0),
    3: ("optimal-rate-burr", _c3_burr_rate, None),
    4: ("optimal-rate-gumbel", _c4_gumbel, None),
    5: ("degraded-rate-no-recenter", _c5_degraded, None),
    6: ("repair-by-recentering", _c6_repair, None),
    7: ("no-degradation-moderate-gamma", _c7_no_degradation, None),
    8: ("shift-sandwich", _c8_shift_sandwich, None),
    9: ("kl-corollary", _c9_kl_corollary, None),
    10: ("monte-carlo-oracle", _c10_mc_oracle, 300.0),
    11: ("von-mises-diagnostics", _c11_von_mises, None),
    12: ("determinism", _c12_determinism, None),
}

SUITES = {
    "core": (1, 2, 11),
    "rates": (3, 4, 5, 6, 7, 8, 9),
    "mc": (10,),
    "all": (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12),
}


def run_criterion(cid: int, ctx: AcceptanceContext) -> CriterionResult:
    name, runner, limit = CRITERIA[cid]
    passed, details, seconds = runner(ctx)
    if limit is not None:
        within = seconds < limit
        passed = passed and within
        details += f"; runtime {seconds:.2f}s (< {limit:.0f}s: {within})"
    return CriterionResult(cid=cid, name=name, passed=passed,
                           details=details, seconds=seconds)


def run_suite(suite: str, jobs: int = 1, out_dir=None, echo=print):
    """Run a verification suite; returns (results, all_passed)."""
    if suite not in SUITES:
        raise KeyError(suite)
    ctx = AcceptanceContext(jobs=jobs)
    results = []
    for cid in SUITES[suite]:
        res = run_criterion(cid, ctx)
        results.append(res)
        if echo:
            echo(res.line())
    all_passed = all(r.passed for r in results)
    if echo:
        total = sum(r.seconds for r in results)
        echo(f"{'ALL PASS' if all_passed else 'FAILURES PRESENT'} "
             f"({len(results)} criteria, {total:.1f}s)")
    if out_dir is not None:
        import pathlib
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for fname, text in build_artifacts(jobs).items():
            (out / fname).write_text(text)
        verdicts = [{"criterion": r.cid, "name": r.name, "passed": r.passed,
                     "details": r.details} for r in results]
        (out / "verdicts.json").write_text(json.dumps(verdicts, indent=2) + "\n")
    return results, all_passed
