"""Threshold sweeps, log-log rate fits, and bound-check verdicts.

A sweep evaluates the divergence panel at each point of a v-grid,
records |A(v)|, and fits log10(metric) on log10|A(v)| by ordinary least
squares.  The checks verify the consequences of the convergence-rate
theory: the Hellinger/|A| boundedness, the sandwich between Hellinger
and total variation, the shifted-GP Hellinger sandwich, and the
translation of Hellinger rates into Kullback-Leibler bounds through
the density-ratio supremum.  The theory's constants are
non-constructive, so every verdict is a boundedness or exponent check,
never a constant comparison.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distances import (DEFAULT_ABS_TOL, DEFAULT_REL_TOL, DistanceReport,
                        compute_report, normalize_metrics)
from .errors import (DegenerateRateError, DomainError, QuadratureError,
                     SweepError)
from .excess import density_ratio_sup, make_excess
from .families import Family
from .limit_models import GpModel, one_plus_gamma_z
from .quadrature import quad

#: fitted-slope acceptance half-width (0.2 for Kullback-Leibler)
SLOPE_TOL = 0.1
KL_SLOPE_TOL = 0.2
#: flat numerical-noise slack for tight divergence inequalities
NOISE_SLACK = 4e-15

DEFAULT_V_GRID = tuple(np.logspace(2.0, 6.0, 9))


@dataclass
class GridPoint:
    v: float
    t: float
    s_t: float
    c_t: float
    abs_A: float
    report: DistanceReport | None = None
    ratio_sup: float | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


@dataclass
class Verdict:
    check: str
    passed: bool
    details: str


@dataclass
class SweepResult:
    family_spec: str
    gamma: float
    recentered: bool
    grid: list
    fitted: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    def metric_series(self, name):
        """(abs_A, values) over non-failed grid points with finite positive values."""
        xs, ys = [], []
        for gp in self.grid:
            if gp.failed or gp.report is None:
                continue
            val = gp.report.metric_value(name)
            if val is not None and math.isfinite(val) and val > 0.0 and gp.abs_A > 0.0:
                xs.append(gp.abs_A)
                ys.append(val)
        return np.asarray(xs), np.asarray(ys)


def fit_loglog(xs, ys) -> FitResult:
    """OLS fit of log10(y) on log10(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise DomainError("need at least two points for a rate fit")
    lx, ly = np.log10(xs), np.log10(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    denom = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if denom == 0.0 else 1.0 - float(np.sum(resid ** 2)) / denom
    return FitResult(slope=float(slope), intercept=float(intercept),
                     r_squared=r2, n_points=int(xs.size))


def _grid_point(fam, v, recenter, metrics, with_ratio_sup, rel_tol, abs_tol):
    m = make_excess(fam, v, recenter)
    point = GridPoint(v=float(v), t=m.t, s_t=m.s_t, c_t=m.c_t,
                      abs_A=abs(float(fam.rate_A(v))))
    try:
        point.report = compute_report(m, GpModel(fam.gamma), v, m.recentered,
                                      metrics, rel_tol, abs_tol)
        if with_ratio_sup and not (fam.gamma < 0.0 and not m.recentered):
            point.ratio_sup = density_ratio_sup(m)
    except QuadratureError as exc:
        point.error = str(exc)
    return point


def sweep(fam: Family, v_grid=DEFAULT_V_GRID, recenter: str = "auto",
          metrics=("h2", "tv", "kl", "d2", "d3"), with_ratio_sup: bool = False,
          rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = DEFAULT_ABS_TOL,
          jobs: int = 1) -> SweepResult:
    """Evaluate the divergence panel along a v-grid and fit decay slopes.

    Grid points failing with a quadrature error are tagged and excluded
    from the fits; more than two failures fail the sweep.
    """
    if fam.degenerate_rate:
        raise DegenerateRateError(
            "rate sweeps need |A(v)| > 0; this family has A identically zero")
    v_grid = sorted(float(v) for v in v_grid)
    if len(v_grid) < 5:
        raise DomainError("v-grid needs at least 5 points")
    if any(v <= 1.0 for v in v_grid):
        raise DomainError("v-grid must lie in (1, inf)")
    metrics = normalize_metrics(metrics)

    args = [(fam, v, recenter, metrics, with_ratio_sup, rel_tol, abs_tol)
            for v in v_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            grid = list(pool.map(_grid_point_star, args))
    else:
        grid = [_grid_point(*a) for a in args]

    failures = [g for g in grid if g.failed]
    if len(failures) > 2:
        raise SweepError(f"{len(failures)} of {len(grid)} grid points failed")

    recentered = fam.gamma < 0.0 if recenter == "auto" else recenter == "on"
    sr = SweepResult(family_spec=fam.spec_string(), gamma=fam.gamma,
                     recentered=bool(recentered), grid=grid)
    fit_names = list(metrics) + (["h"] if "h2" in metrics else [])
    for name in fit_names:
        xs, ys = sr.metric_series(name)
        if xs.size >= 2:
            sr.fitted[name] = fit_loglog(xs, ys)
    return sr


def _grid_point_star(a):
    return _grid_point(*a)


def check_sandwich(sr: SweepResult) -> Verdict:
    """H^2 <= 2 TV <= 2 H at every grid point, with 2x quadrature slack."""
    bad = []
    for g in sr.grid:
        if g.failed or g.report is None:
            continue
        r = g.report
        if r.hellinger_sq is None or r.tv is None:
            return Verdict("sandwich", False, "sweep lacks h2/tv metrics")
        e_h2 = r.quad_error.get("h2", 0.0)
        e_tv = r.quad_error.get("tv", 0.0)
        h = r.hellinger
        e_h = e_h2 / (2.0 * h) if h > 0.0 else e_h2
        lo_ok = r.hellinger_sq <= 2.0 * r.tv + 2.0 * (e_h2 + 2.0 * e_tv) + NOISE_SLACK
        hi_ok = 2.0 * r.tv <= 2.0 * h + 2.0 * (2.0 * e_tv + e_h) + NOISE_SLACK
        if not (lo_ok and hi_ok):
            bad.append(f"v={g.v:g}")
    if bad:
        return Verdict("sandwich", False, "violated at " + ", ".join(bad))
    return Verdict("sandwich", True,
                   f"H^2 <= 2TV <= 2H at {sum(not g.failed for g in sr.grid)} points")


def check_theorem1(sr: SweepResult) -> Verdict:
    """Boundedness of H^2/|A|^2 over the asymptotic (top) half of the grid."""
    if sr.gamma < 0.0 and not sr.recentered:
        return Verdict("theorem1", False,
                       "needs the recentered sweep when gamma < 0")
    pts = [(g.v, g.report.hellinger_sq / g.abs_A ** 2)
           for g in sr.grid
           if not g.failed and g.report is not None
           and g.report.hellinger_sq is not None and g.abs_A > 0.0]
    if len(pts) < 4:
        return Verdict("theorem1", False, "too few grid points")
    pts.sort()
    top = [r for _, r in pts[len(pts) // 2:]]
    lo, hi = min(top), max(top)
    ok = hi <= 2.0 * lo
    return Verdict("theorem1", ok,
                   f"H^2/|A|^2 in [{lo:.4g}, {hi:.4g}] over the top half"
                   + ("" if ok else " (spread > 2x)"))


def shift_hellinger_sq(gamma: float, mu: float,
                       rel_tol: float = DEFAULT_REL_TOL,
                       abs_tol: float = DEFAULT_ABS_TOL):
    """Squared Hellinger distance between h_gamma and its shift by mu (gamma < 0).

    Uses the one-sided form from the shift-sandwich analysis: the
    formula ratio integrated over (0, -1/gamma) plus the mass of the
    shifted density beyond -1/gamma.  A shift towards the interior
    (mu < 0) is mapped to the mirrored positive shift first.
    """
    if gamma >= 0.0:
        raise DomainError("shift sandwich applies to gamma < 0")
    mt = abs(float(mu))
    if mt == 0.0:
        return 0.0, 0.0
    b = -1.0 / gamma
    gp = GpModel(gamma)
    expo = -(1.0 / gamma + 1.0)

    def formula(y):
        u = one_plus_gamma_z(gamma, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(expo * np.log(u))
        return np.where(u > 0.0, out, 0.0)

    def fx(x):
        s = np.sqrt(np.asarray(gp.pdf(x))) - np.sqrt(formula(np.asarray(x) - mt))
        return s * s

    def fup(e):
        pv = np.asarray(gp.pdf_upper_offset(e))
        qv = np.exp(expo * np.log(-gamma * (np.asarray(e) + mt)))
        s = np.sqrt(pv) - np.sqrt(qv)
        return s * s

    cross, err = quad(fx, 0.0, b, rel_tol=rel_tol, abs_tol=abs_tol, fn_upper=fup)
    tail = math.exp(math.log(-gamma * mt) * (-1.0 / gamma))
    return cross + tail, err


def check_prop1(gamma: float, mu_abs_a_pairs) -> Verdict:
    """Slope of H(h_gamma, h_gamma(. - mu_t)) vs |A| against the sandwich window."""
    if gamma >= 0.0:
        return Verdict("prop1", False, "needs gamma < 0")
    pairs = [(float(mu), float(a)) for mu, a in mu_abs_a_pairs]
    if all(mu == 0.0 for mu, _ in pairs):
        return Verdict("prop1", True, "not-applicable (mu identically zero, H = 0)")
    xs, ys = [], []
    for mu, abs_a in pairs:
        if mu == 0.0 or abs_a <= 0.0:
            continue
        h2, _ = shift_hellinger_sq(gamma, mu)
        if h2 > 0.0:
            xs.append(abs_a)
            ys.append(math.sqrt(h2))
    if len(xs) < 2:
        return Verdict("prop1", False, "too few usable points")
    fit = fit_loglog(xs, ys)
    lo = min(1.0, -1.0 / (2.0 * gamma)) - SLOPE_TOL
    hi = -1.0 / (2.0 * gamma) + SLOPE_TOL
    ok = lo <= fit.slope <= hi
    return Verdict("prop1", ok,
                   f"slope {fit.slope:.4f} vs window [{lo:.2f}, {hi:.2f}]")


def check_kl_corollary(sr: SweepResult, slope_window=None) -> Verdict:
    """KL <= 2 M H^2 and D_p <= 2 p! M H^2 pointwise, plus the KL decay slope.

    M is the computed density-ratio supremum at each grid point; the
    inequality is checked with quadrature slack (it is an identity-level
    bound, so only numerical noise can break it).
    """
    bad = []
    for g in sr.grid:
        if g.failed or g.report is None:
            continue
        r = g.report
        if r.kl is None or r.hellinger_sq is None or g.ratio_sup is None:
            return Verdict("kl_corollary", False,
                           "sweep lacks kl/h2/ratio_sup values")
        if not math.isfinite(g.ratio_sup):
            bad.append(f"v={g.v:g}: ratio sup infinite")
            continue
        m_hat = g.ratio_sup
        slack = 2.0 * (r.quad_error.get("kl", 0.0)
                       + 2.0 * m_hat * r.quad_error.get("h2", 0.0)) + NOISE_SLACK
        bound = 2.0 * m_hat * r.hellinger_sq
        if math.isfinite(r.kl) and r.kl > bound + slack:
            bad.append(f"v={g.v:g}: KL {r.kl:.3g} > 2MH^2 {bound:.3g}")
        for order, dval in sorted(r.dp.items()):
            febound = 2.0 * math.factorial(order) * m_hat * r.hellinger_sq
            dslack = 2.0 * (r.quad_error.get(f"d{order}", 0.0)
                            + 2.0 * math.factorial(order) * m_hat
                            * r.quad_error.get("h2", 0.0)) + NOISE_SLACK
            if math.isfinite(dval) and dval > febound + dslack:
                bad.append(f"v={g.v:g}: D{order} {dval:.3g} > bound {febound:.3g}")
    xs, ys = sr.metric_series("kl")
    if xs.size < 2:
        return Verdict("kl_corollary", False, "no finite KL values to fit")
    fit = fit_loglog(xs, ys)
    lo, hi = slope_window if slope_window else (2.0 - KL_SLOPE_TOL, 2.0 + KL_SLOPE_TOL)
    if not lo <= fit.slope <= hi:
        bad.append(f"KL slope {fit.slope:.4f} outside [{lo:.2f}, {hi:.2f}]")
    if bad:
        return Verdict("kl_corollary", False, "; ".join(bad))
    return Verdict("kl_corollary", True,
                   f"inequalities hold; KL slope {fit.slope:.4f}")


# Serialisation -------------------------------------------------------------

CSV_COLUMNS = ("v", "t", "s_t", "c_t", "abs_A", "H2", "H", "TV", "KL",
               "D2", "D3", "ratio_sup", "err_H2", "err_TV", "err_KL",
               "err_D2", "err_D3", "status")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _point_row(g: GridPoint):
    r = g.report
    def metric(name):
        return None if r is None else r.metric_value(name)
    def qerr(name):
        return None if r is None else r.quad_error.get(name)
    return [g.v, g.t, g.s_t, g.c_t, g.abs_A,
            metric("h2"), metric("h"), metric("tv"), metric("kl"),
            metric("d2"), metric("d3"), g.ratio_sup,
            qerr("h2"), qerr("tv"), qerr("kl"), qerr("d2"), qerr("d3"),
            "ok" if not g.failed else f"failed: {g.error}"]


def sweep_to_csv(sr: SweepResult) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for g in sr.grid:
        lines.append(",".join(_fmt(x) for x in _point_row(g)))
    return "\n".join(lines) + "\n"


def _jsonable_float(x):
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def sweep_to_jsonable(sr: SweepResult) -> dict:
    grid = []
    for g in sr.grid:
        row = _point_row(g)
        grid.append({
            "v": row[0], "t": row[1], "s_t": row[2], "c_t": row[3],
            "abs_A": row[4],
            "metrics": {"H2": _jsonable_float(row[5]), "H": _jsonable_float(row[6]),
                        "TV": _jsonable_float(row[7]), "KL": _jsonable_float(row[8]),
                        "D2": _jsonable_float(row[9]), "D3": _jsonable_float(row[10])},
            "ratio_sup": _jsonable_float(row[11]),
            "quad_error": {"H2": row[12], "TV": row[13], "KL": row[14],
                           "D2": row[15], "D3": row[16]},
            "status": row[17],
        })
    return {
        "family": sr.family_spec,
        "gamma": sr.gamma,
        "recentered": sr.recentered,
        "grid": grid,
        "fitted": {name: {"slope": f.slope, "intercept": f.intercept,
                          "r_squared": f.r_squared, "n_points": f.n_points}
                   for name, f in sorted(sr.fitted.items())},
        "verdicts": [{"check": v.check, "passed": v.passed, "details": v.details}
                     for v in sr.verdicts],
    }
