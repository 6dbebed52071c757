import json
import math

import numpy as np
import pytest

from gprates import (Burr, DegenerateRateError, DomainError, ExactGP,
                     GpModel, Gumbel, ReversedBurr, SweepError,
                     check_kl_corollary, check_prop1, check_sandwich,
                     check_theorem1, fit_loglog, shift_hellinger_sq, sweep,
                     sweep_to_csv, sweep_to_jsonable)
from gprates.rates import CSV_COLUMNS, GridPoint, SweepResult
from gprates.distances import DistanceReport
import gprates.rates


@pytest.fixture(scope="module")
def burr_sweep():
    return sweep(Burr(2, 1), with_ratio_sup=True)


@pytest.fixture(scope="module")
def rb_on_sweep():
    return sweep(ReversedBurr(1, 1, 0.0), recenter="on", with_ratio_sup=True)


@pytest.fixture(scope="module")
def rb_off_sweep():
    return sweep(ReversedBurr(1, 1, 0.0), recenter="off")


def test_burr_hellinger_slope_is_one(burr_sweep):
    fit = burr_sweep.fitted["h"]
    assert abs(fit.slope - 1.0) <= 0.1
    assert fit.r_squared >= 0.999


def test_rb_unrecentred_slope_is_half(rb_off_sweep):
    assert abs(rb_off_sweep.fitted["h"].slope - 0.5) <= 0.1


def test_rb_recentred_slope_is_one(rb_on_sweep):
    assert abs(rb_on_sweep.fitted["h"].slope - 1.0) <= 0.1


def test_grid_is_increasing_and_rates_positive(burr_sweep):
    vs = [g.v for g in burr_sweep.grid]
    assert vs == sorted(vs) and len(set(vs)) == len(vs)
    assert all(g.abs_A > 0 for g in burr_sweep.grid)


def test_monotone_decay_in_v(burr_sweep, rb_on_sweep):
    for sr in (burr_sweep, rb_on_sweep):
        for name in ("h2", "tv", "kl"):
            vals = [g.report.metric_value(name) for g in sr.grid if g.v >= 1e3]
            for a, b in zip(vals, vals[1:]):
                assert b <= a + 1e-9


def test_slope_stability_dropping_smallest_v(burr_sweep):
    xs, ys = burr_sweep.metric_series("h")
    full = fit_loglog(xs, ys).slope
    trimmed = fit_loglog(xs[:-1], ys[:-1]).slope  # abs_A descending in v
    assert abs(full - trimmed) < 0.05


def test_sweep_rejects_degenerate_families():
    with pytest.raises(DegenerateRateError):
        sweep(ExactGP(0.5))
    with pytest.raises(DegenerateRateError):
        sweep(Burr(1.0, 2.0))


def test_sweep_validates_grid():
    with pytest.raises(DomainError):
        sweep(Burr(2, 1), v_grid=[1e2, 1e3])
    with pytest.raises(DomainError):
        sweep(Burr(2, 1), v_grid=[0.5, 1e2, 1e3, 1e4, 1e5])


def test_sweep_tags_failed_points_and_fails_above_two(monkeypatch):
    from gprates.errors import QuadratureError

    calls = {"n": 0}
    real = gprates.rates.compute_report

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 1:
            raise QuadratureError("synthetic failure")
        return real(*args, **kwargs)

    monkeypatch.setattr(gprates.rates, "compute_report", flaky)
    sr = sweep(Burr(2, 1), metrics=("h2",))
    assert sum(g.failed for g in sr.grid) == 1
    assert "h" in sr.fitted and sr.fitted["h"].n_points == len(sr.grid) - 1

    def broken(*args, **kwargs):
        raise QuadratureError("always")

    monkeypatch.setattr(gprates.rates, "compute_report", broken)
    with pytest.raises(SweepError):
        sweep(Burr(2, 1), metrics=("h2",))


def test_check_sandwich_passes(burr_sweep, rb_on_sweep, rb_off_sweep):
    for sr in (burr_sweep, rb_on_sweep, rb_off_sweep):
        assert check_sandwich(sr).passed


def test_check_theorem1_passes(burr_sweep, rb_on_sweep):
    assert check_theorem1(burr_sweep).passed
    assert check_theorem1(rb_on_sweep).passed


def test_check_theorem1_rejects_wrong_rate():
    # synthetic sweep where H^2 decays like |A| (unit slope in H^2):
    # the ratio H^2/|A|^2 = 1/|A| blows up
    grid = []
    for v in np.logspace(2, 6, 9):
        a = 1.0 / v
        rep = DistanceReport(v=v, recentered=True, hellinger_sq=a,
                             hellinger=math.sqrt(a))
        grid.append(GridPoint(v=v, t=0.0, s_t=1.0, c_t=0.0, abs_A=a, report=rep))
    sr = SweepResult(family_spec="synthetic", gamma=-1.0, recentered=True,
                     grid=grid)
    assert not check_theorem1(sr).passed


def test_check_theorem1_requires_recentering_for_negative_gamma(rb_off_sweep):
    assert not check_theorem1(rb_off_sweep).passed


def test_shift_hellinger_closed_form_gamma_minus_one():
    # gamma = -1: the formula ratio is identically 1, so H^2 equals the
    # boundary mass (-gamma mu)^{-1/gamma} = |mu|
    for mu in (0.01, -0.02, 0.001):
        h2, _ = shift_hellinger_sq(-1.0, mu)
        assert h2 == pytest.approx(abs(mu), rel=1e-10)
    assert shift_hellinger_sq(-1.0, 0.0) == (0.0, 0.0)
    with pytest.raises(DomainError):
        shift_hellinger_sq(0.5, 0.1)


def test_check_prop1_windows(rb_on_sweep):
    fam = ReversedBurr(1, 1, 0.0)
    pairs = [(float(fam.mu_v(g.v)), g.abs_A) for g in rb_on_sweep.grid]
    verdict = check_prop1(-1.0, pairs)
    assert verdict.passed and "0.4" in verdict.details

    fam4 = ReversedBurr(1, 4, 0.0)
    vs = [g.v for g in rb_on_sweep.grid]
    pairs4 = [(float(fam4.mu_v(v)), abs(float(fam4.rate_A(v)))) for v in vs]
    assert check_prop1(-0.25, pairs4).passed


def test_check_prop1_degenerate_and_domain():
    verdict = check_prop1(-1.0, [(0.0, 0.01)] * 5)
    assert verdict.passed and "not-applicable" in verdict.details
    assert not check_prop1(0.5, [(0.1, 0.01)]).passed


def test_check_kl_corollary_passes(burr_sweep, rb_on_sweep):
    for sr in (burr_sweep, rb_on_sweep):
        verdict = check_kl_corollary(sr)
        assert verdict.passed, verdict.details


def test_check_kl_corollary_gumbel_example():
    sr = sweep(Gumbel(), with_ratio_sup=True)
    verdict = check_kl_corollary(sr)
    assert verdict.passed
    # the paper's example: M bounded by exp(exp(-t)) which tends to 1
    assert all(g.ratio_sup <= math.exp(math.exp(-g.t)) + 1e-9 for g in sr.grid)


def test_check_kl_corollary_rejects_inflated_kl(burr_sweep):
    import copy
    sr = copy.deepcopy(burr_sweep)
    for g in sr.grid:
        g.report.kl = 10.0 * g.report.hellinger_sq * g.ratio_sup
    assert not check_kl_corollary(sr).passed


def test_recentring_improves_hellinger_pointwise(rb_on_sweep, rb_off_sweep):
    for g_on, g_off in zip(rb_on_sweep.grid, rb_off_sweep.grid):
        if g_on.v >= 1e3:
            assert g_on.report.hellinger < g_off.report.hellinger


def test_csv_schema_and_determinism(burr_sweep):
    text = sweep_to_csv(burr_sweep)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(burr_sweep.grid)
    assert text == sweep_to_csv(burr_sweep)


def test_infinity_serialised_as_string():
    rep = DistanceReport(v=10.0, recentered=False, hellinger_sq=0.1,
                         hellinger=math.sqrt(0.1), tv=0.05, kl=math.inf)
    gp = GridPoint(v=10.0, t=1.0, s_t=1.0, c_t=0.0, abs_A=0.1, report=rep)
    sr = SweepResult(family_spec="synthetic", gamma=-1.0, recentered=False,
                     grid=[gp])
    payload = sweep_to_jsonable(sr)
    assert payload["grid"][0]["metrics"]["KL"] == "inf"
    row = sweep_to_csv(sr).strip().split("\n")[1].split(",")
    assert row[CSV_COLUMNS.index("KL")] == "inf"
    json.dumps(payload)  # serialisable without Infinity literals


def test_jobs_parallel_matches_serial():
    serial = sweep(Burr(2, 1), v_grid=np.logspace(2, 4, 5), metrics=("h2",))
    parallel = sweep(Burr(2, 1), v_grid=np.logspace(2, 4, 5), metrics=("h2",),
                     jobs=2)
    for a, b in zip(serial.grid, parallel.grid):
        assert a.report.hellinger_sq == b.report.hellinger_sq
