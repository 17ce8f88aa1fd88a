import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from becgrowth.bath import (BathFitError, BathMoments, TruncatedBath, bath_for_number,
                            couple_step, fit_truncated, fraction_above_cut, lower_gamma, retherm,
                            truncated_moments)
from becgrowth.core import CONSTANTS
from becgrowth.oracles import lower_gamma_quadrature, truncated_energy_integral

WBAR = 2 * math.pi * 100.0


def test_lower_gamma_closed_form():
    # gamma(3, x) = 2 - e^-x (x^2 + 2x + 2)
    x = 5.0
    assert lower_gamma(3, x) == pytest.approx(2 - math.exp(-x) * (x * x + 2 * x + 2), rel=1e-14)
    assert lower_gamma(3, math.inf) == pytest.approx(2.0)


@pytest.mark.parametrize("s", [3, 4])
@pytest.mark.parametrize("x", [0.5, 2.0, 6.0, 15.0])
def test_lower_gamma_vs_quadrature(s, x):
    assert lower_gamma(s, x) == pytest.approx(lower_gamma_quadrature(s, x), rel=1e-12)


def test_cut_fraction_is_complement_of_truncated_count():
    for eta in (3.0, 5.0, 7.0):
        assert fraction_above_cut(eta) == pytest.approx(1 - lower_gamma(3, eta) / 2, rel=1e-12)


@given(st.floats(0.1, 30.0), st.floats(0.1, 30.0))
def test_cut_fraction_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert fraction_above_cut(lo) >= fraction_above_cut(hi)
    assert fraction_above_cut(lo, "flat") >= fraction_above_cut(hi, "flat")


def test_cut_fraction_bad_input():
    with pytest.raises(ValueError):
        fraction_above_cut(-1.0)
    with pytest.raises(ValueError):
        fraction_above_cut(5.0, "cubic")


def test_moments_vs_energy_quadrature():
    b = TruncatedBath(500e-9, 0.2 * CONSTANTS.k_B * 500e-9, 6.0, WBAR)
    mom = truncated_moments(b)
    c = math.exp(b.chemical_potential / b.kT) / (2 * b.level_spacing ** 3)
    n_q = c * truncated_energy_integral(3, b.eta, b.kT)
    e_q = c * truncated_energy_integral(4, b.eta, b.kT)
    assert mom.atom_number == pytest.approx(n_q, rel=1e-12)
    assert mom.energy == pytest.approx(e_q, rel=1e-12)


@settings(max_examples=200)
@given(temp=st.floats(50e-9, 5e-6), mu_frac=st.floats(-5.0, 2.0), eta=st.floats(1.0, 20.0))
def test_fit_inverts_moments(temp, mu_frac, eta):
    assume(mu_frac < 0.99 * eta)
    b = TruncatedBath(temp, mu_frac * CONSTANTS.k_B * temp, eta, WBAR)
    b2 = fit_truncated(truncated_moments(b), eta, WBAR)
    assert b2.temperature == pytest.approx(temp, rel=1e-11)
    assert b2.chemical_potential / b.kT == pytest.approx(mu_frac, abs=1e-9)


@settings(max_examples=200)
@given(eta=st.floats(0.5, 20.0), mu_frac=st.floats(-3.0, 0.4))
def test_retherm_always_cools(eta, mu_frac):
    b = TruncatedBath(500e-9, mu_frac * CONSTANTS.k_B * 500e-9, eta, WBAR)
    t_new, mu_new = retherm(b)
    assert t_new < b.temperature


def test_retherm_conserves_number_and_energy():
    b = TruncatedBath(500e-9, 0.1 * CONSTANTS.k_B * 500e-9, 5.0, WBAR)
    t_new, mu_new = retherm(b)
    mom = truncated_moments(b)
    full = TruncatedBath(t_new, mu_new, 1e3, WBAR)  # effectively untruncated
    mom2 = truncated_moments(full)
    assert mom2.atom_number == pytest.approx(mom.atom_number, rel=1e-12)
    assert mom2.energy == pytest.approx(mom.energy, rel=1e-12)


def test_retherm_eta5_ratio():
    b = TruncatedBath(1e-6, 0.0, 5.0, WBAR)
    assert retherm(b)[0] / 1e-6 == pytest.approx(0.840, abs=1e-3)


def test_couple_step_conserves():
    b = bath_for_number(5e6, 500e-9, 6.0, WBAR)
    mom = truncated_moments(b)
    mu_n = 0.1 * b.kT
    b2 = couple_step(b, 1e4, mu_n)
    mom2 = truncated_moments(b2)
    assert mom2.atom_number + 1e4 == pytest.approx(mom.atom_number, rel=1e-13)
    assert mom2.energy + 1e4 * mu_n == pytest.approx(mom.energy, rel=1e-13)
    assert b2.eta == b.eta


def test_couple_step_exhaustion():
    b = bath_for_number(1e3, 500e-9, 6.0, WBAR)
    with pytest.raises(BathFitError, match="exhausted"):
        couple_step(b, 2e3, 0.0)


def test_bath_for_number():
    b = bath_for_number(3e6, 400e-9, 7.0, WBAR)
    assert truncated_moments(b).atom_number == pytest.approx(3e6, rel=1e-12)


def test_invalid_bath():
    with pytest.raises(BathFitError):
        TruncatedBath(0.0, 0.0, 6.0, WBAR)
    with pytest.raises(BathFitError):
        TruncatedBath(1e-7, 7 * CONSTANTS.k_B * 1e-7, 6.0, WBAR)
    with pytest.raises(BathFitError):
        fit_truncated(BathMoments(-1.0, 1.0), 6.0, WBAR)
