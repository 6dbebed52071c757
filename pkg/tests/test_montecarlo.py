import math

import numpy as np
import pytest

from gprates import (Burr, DomainError, ExactGP, GpModel, ReversedBurr,
                     hellinger_sq, make_excess, mc_hellinger_sq, mc_tv,
                     sample_excesses, total_variation)
from gprates.montecarlo import _mass_outside, substream_seed


def test_sample_excesses_dkw():
    # ExactGP(0) excesses are exactly unit exponential; DKW bound at
    # 99.9% confidence for n = 1e5 is 0.00617
    m = make_excess(ExactGP(0.0), 100.0)
    s = np.sort(sample_excesses(m, 100_000, seed=7))
    emp = np.arange(1, s.size + 1) / s.size
    cdf = np.asarray(GpModel(0.0).cdf(s))
    ks = max(float(np.max(np.abs(cdf - emp))),
             float(np.max(np.abs(cdf - (emp - 1.0 / s.size)))))
    assert ks <= 0.006


@pytest.mark.parametrize("fam,rec", [
    (Burr(2, 1), "auto"),
    (ReversedBurr(1, 1, 0.0), "on"),
    (ReversedBurr(1, 1, 0.0), "off"),
])
def test_sample_excesses_range(fam, rec):
    m = make_excess(fam, 1e3, rec)
    s = sample_excesses(m, 20_000, seed=3)
    assert float(np.min(s)) > 0.0
    assert float(np.max(s)) < m.endpoint


def test_sample_excesses_deterministic():
    m = make_excess(Burr(2, 1), 1e3)
    assert np.array_equal(sample_excesses(m, 5_000, 11),
                          sample_excesses(m, 5_000, 11))
    assert not np.array_equal(sample_excesses(m, 5_000, 11),
                              sample_excesses(m, 5_000, 12))
    with pytest.raises(DomainError):
        sample_excesses(m, 0, 1)


def test_exact_gp_estimates_are_null():
    m = make_excess(ExactGP(0.5), 1e3)
    est = mc_hellinger_sq(m, 10_000, seed=1)
    assert est.value <= 1e-12 and est.std_error <= 1e-12
    est = mc_tv(m, 10_000, seed=1)
    assert est.value <= 1e-12


def test_estimates_deterministic_and_seeded():
    m = make_excess(Burr(2, 1), 1e3)
    a = mc_hellinger_sq(m, 20_000, seed=5)
    b = mc_hellinger_sq(m, 20_000, seed=5)
    c = mc_hellinger_sq(m, 20_000, seed=6)
    assert a == b and a.value != c.value
    assert a.n == 20_000 and a.seed == 5


def test_minimum_sample_size_enforced():
    m = make_excess(Burr(2, 1), 1e3)
    with pytest.raises(DomainError):
        mc_hellinger_sq(m, 5_000, seed=1)


@pytest.mark.parametrize("fam,rec,v", [
    (Burr(2, 1), "auto", 1e3),
    (ReversedBurr(1, 1, 0.0), "on", 1e3),
    (ReversedBurr(1, 1, 0.0), "off", 1e3),
])
def test_oracle_agreement(fam, rec, v):
    m = make_excess(fam, v, rec)
    q = GpModel(fam.gamma)
    qh2, _ = hellinger_sq(m, q)
    qtv, _ = total_variation(m, q)
    eh = mc_hellinger_sq(m, 1_000_000, seed=404)
    et = mc_tv(m, 1_000_000, seed=404 + 32 * 0x9E3779B9)
    assert abs(qh2 - eh.value) <= 3.0 * eh.std_error
    assert abs(qtv - et.value) <= 3.0 * et.std_error


def test_standard_error_scales_as_root_n():
    m = make_excess(Burr(2, 1), 1e3)
    small = mc_hellinger_sq(m, 10_000, seed=21)
    large = mc_hellinger_sq(m, 1_000_000, seed=22)
    ratio = small.std_error / large.std_error
    assert abs(ratio / 10.0 - 1.0) <= 0.2


def test_substream_constant():
    assert substream_seed(100, 0) == 100
    assert substream_seed(100, 3) == 100 + 3 * 0x9E3779B9


def test_mass_outside_guard():
    # same-gamma pairing never leaves mass outside the GP support, but a
    # shorter-support target does
    m = make_excess(ReversedBurr(1, 1, 0.0), 1e3, "off")
    assert _mass_outside(m, GpModel(-1.0)) == 0.0
    shorter = GpModel(-2.0)  # endpoint 0.5 < 0.999
    mass = _mass_outside(m, shorter)
    assert mass == pytest.approx(1.0 - m.cdf(0.5), rel=1e-9)
    assert 0.0 < mass < 1.0
