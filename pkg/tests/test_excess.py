import math

import numpy as np
import pytest

from gprates import (Burr, DomainError, ExactGP, GpModel, Gumbel,
                     ReversedBurr, density_ratio_sup, eta_diag,
                     excess_at_threshold, make_excess, quad)

SWEPT = [
    (Burr(2, 1), "auto"),
    (ReversedBurr(1, 1, 0.0), "auto"),
    (ReversedBurr(1, 1, 0.0), "off"),
    (ReversedBurr(1, 4, 0.0), "auto"),
    (Gumbel(), "auto"),
]


def _norm_integral(m):
    kw = {"fn_upper": m.pdf_upper_offset} if math.isfinite(m.endpoint) else {}
    val, err = quad(m.pdf, 0.0, m.endpoint, **kw)
    return val, err


def test_make_excess_exact_gp():
    fam = ExactGP(0.5)
    m = make_excess(fam, 100.0, "auto")
    assert not m.recentered and m.c_t == 0.0
    assert m.t == pytest.approx(float(fam.U(100.0)), rel=1e-14)
    assert m.s_t == pytest.approx(1.0 + 0.5 * m.t, rel=1e-13)


def test_make_excess_reversed_burr_recentred():
    fam = ReversedBurr(1, 1, 0.0)
    m = make_excess(fam, 100.0, "auto")
    assert m.recentered
    assert m.endpoint == 1.0  # exactly -1/gamma
    # c(t) = xstar - t + s(t)/gamma
    assert m.c_t == pytest.approx(fam.xstar - m.t + m.s_t / fam.gamma, abs=1e-15)
    assert m.mu_t == pytest.approx(-0.01, rel=1e-12)  # -kc/(1+w) = -1/v
    off = make_excess(fam, 100.0, "off")
    assert off.c_t == 0.0
    assert off.endpoint == pytest.approx(0.99, rel=1e-13)  # (xstar - t)/s(t)


def test_make_excess_validation():
    with pytest.raises(DomainError):
        make_excess(Burr(2, 1), 1.0)
    with pytest.raises(DomainError):
        make_excess(Burr(2, 1), 10.0, "sometimes")


def test_density_at_origin_is_one():
    # l_t(0+) = s(t) f(t)/(1 - F(t)) = 1 by the choice of s(t)
    m = make_excess(Gumbel(), math.e)
    assert m.pdf(1e-12) == pytest.approx(1.0, abs=1e-9)
    for g in (0.5, -0.5):
        m = make_excess(ExactGP(g), 1e3)
        assert m.pdf(1e-12) == pytest.approx(1.0, abs=1e-9)


def test_density_zero_outside_support():
    m = make_excess(ReversedBurr(1, 1, 0.0), 100.0)
    assert m.pdf(-0.5) == 0.0
    assert m.pdf(0.0) == 0.0
    assert m.pdf(1.0 + 1e-12) == 0.0
    assert m.pdf(0.5) > 0.0


@pytest.mark.parametrize("fam,rec", SWEPT,
                         ids=lambda p: getattr(p, "spec_string", lambda: p)())
@pytest.mark.parametrize("v", [1e2, 1e3, 1e4, 1e5, 1e6])
def test_excess_density_normalised(fam, rec, v):
    m = make_excess(fam, v, rec)
    val, _ = _norm_integral(m)
    assert abs(val - 1.0) <= 1e-9


@pytest.mark.parametrize("gamma", (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0))
def test_exactness_baseline(gamma):
    q = GpModel(gamma)
    xs = np.asarray(q.quantile(np.linspace(0.001, 0.99, 300)))
    for v in (1e2, 1e4, 1e6):
        m = make_excess(ExactGP(gamma), v)
        sup = float(np.max(np.abs(m.pdf(xs) - np.asarray(q.pdf(xs)))))
        assert sup <= 1e-12


@pytest.mark.parametrize("fam,rec", SWEPT,
                         ids=lambda p: getattr(p, "spec_string", lambda: p)())
def test_pointwise_convergence_to_gp(fam, rec):
    q = GpModel(fam.gamma)
    hi = q.upper if fam.gamma < 0 else 5.0
    xs = np.linspace(0.05, hi * 0.95 if math.isfinite(hi) else hi, 25)
    sups = []
    for v in (1e3, 1e4, 1e5, 1e6):
        m = make_excess(fam, v, rec)
        sups.append(float(np.max(np.abs(m.pdf(xs) - np.asarray(q.pdf(xs))))))
    for a, b in zip(sups, sups[1:]):
        assert b <= a + 1e-9
    assert sups[-1] < sups[0]


@pytest.mark.parametrize("fam", [ReversedBurr(1, 1, 0.0), ReversedBurr(1, 4, 0.0),
                                 ReversedBurr(2, 1.5, 1.0)],
                         ids=lambda f: f.spec_string())
def test_endpoint_approach_rate(fam):
    # |(xstar - t)/s(t) + 1/gamma| <= C |A(v)| with one C along the sweep
    vs = np.logspace(3, 6, 7)
    gaps = np.array([abs(float(fam.gap_v(v) / fam.scale_v(v) + 1.0 / fam.gamma))
                     for v in vs])
    abs_a = np.abs(np.asarray(fam.rate_A(vs)))
    c = gaps[0] / abs_a[0]
    assert np.all(gaps <= 1.5 * c * abs_a)


@pytest.mark.parametrize("fam", [ReversedBurr(1, 1, 0.0), ReversedBurr(1, 4, 0.0)],
                         ids=lambda f: f.spec_string())
def test_mu_over_rate_converges(fam):
    r5 = float(fam.mu_v(1e5)) / abs(float(fam.rate_A(1e5)))
    r6 = float(fam.mu_v(1e6)) / abs(float(fam.rate_A(1e6)))
    assert abs(r6 / r5 - 1.0) <= 0.10


def test_ratio_sup_exact_gp_is_one():
    for g in (0.5, -0.5, 0.0):
        m = make_excess(ExactGP(g), 1e3)
        assert density_ratio_sup(m) == pytest.approx(1.0, abs=1e-9)


def test_ratio_sup_gumbel_paper_bound():
    m = excess_at_threshold(Gumbel(), 2.0)
    sup = density_ratio_sup(m)
    assert 1.0 <= sup <= math.exp(math.exp(-2.0)) + 1e-6


def test_ratio_sup_stable_under_grid_refinement():
    m = make_excess(Burr(2, 1), 1e4)
    r1 = density_ratio_sup(m, grid_points=2048)
    r2 = density_ratio_sup(m, grid_points=8192)
    assert abs(r1 - r2) <= 0.01 * r1


def test_ratio_sup_requires_recentering_for_negative_gamma():
    m = make_excess(ReversedBurr(1, 1, 0.0), 100.0, "off")
    with pytest.raises(DomainError):
        density_ratio_sup(m)


def test_ratio_sup_anomaly_sentinel():
    class Spike:
        gamma = 0.5
        recentered = True
        endpoint = math.inf

        def support_bounds(self):
            return (0.0, math.inf)

        def pdf(self, x):
            x = np.asarray(x, dtype=float)
            return np.where(x > 0, 1e300 * np.exp(-x), 0.0)

    assert density_ratio_sup(Spike()) == math.inf


def test_eta_diagnostics():
    burr = Burr(2, 1)
    # (1 + t/2) * 2t/(1 + t^2) - 1 = (2t - 1)/(1 + t^2)
    assert eta_diag(burr, 10.0) == pytest.approx(19.0 / 101.0, abs=1e-12)
    assert abs(eta_diag(ExactGP(0.5), 3.0)) <= 1e-14
    assert abs(eta_diag(burr, 1e4)) <= 2.1e-4
    with pytest.raises(DomainError):
        eta_diag(Gumbel(), 1.0)


def test_eta_negative_gamma_branch_vanishes():
    # eta~ - 1/(|gamma| y) is the family-specific part; for the reversed
    # Burr with c = k = 1 it works out to -(2 + u)/(1 + u)^2 * u ~ O(u).
    fam = ReversedBurr(1, 1, 0.0)
    t = float(fam.U(1e5))
    val = eta_diag(fam, t)
    assert abs(val) < 1.0  # finite, small-ish diagnostic
    exact_gp = ExactGP(-0.5)
    tg = float(exact_gp.U(1e4))
    # for the exact GP the diagnostic reduces to 1/(|gamma| y) = (x*-t)/|gamma|
    gap = exact_gp.xstar - tg
    assert eta_diag(exact_gp, tg) == pytest.approx(gap / 0.5, rel=1e-6)
