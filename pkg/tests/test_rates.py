import math

import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings, strategies as st

from becgrowth.chempot import ChemPotentialModel
from becgrowth.core import CONSTANTS, PRESETS, Trap
from becgrowth.oracles import k1_quadrature, stationary_point_bisection
from becgrowth.rates import (RateContext, bessel_k1, net_growth_rate, stationary_point, w_minus,
                             w_plus, zk1)


def ctx_for(preset="rb87", f=100.0, temp=500e-9, mu_frac=0.3, **hooks):
    m = ChemPotentialModel(PRESETS[preset], Trap.from_hz(f))
    return RateContext(m, temp, mu_frac * CONSTANTS.k_B * temp, **hooks)


@pytest.mark.parametrize("z", [1e-6, 1e-3, 0.1, 1.0, 1.999, 2.0, 2.001, 5.0, 30.0, 100.0, 600.0])
def test_k1_vs_scipy(z):
    assert bessel_k1(z) == pytest.approx(sps.k1(z), rel=1e-13)


@pytest.mark.parametrize("z", np.logspace(-3, 2, 12))
def test_k1_vs_quadrature(z):
    assert bessel_k1(z) == pytest.approx(k1_quadrature(z), rel=1e-12)


def test_k1_vectorized_matches_scalar():
    z = np.array([0.01, 1.5, 2.5, 40.0])
    assert np.array_equal(bessel_k1(z), np.array([bessel_k1(x) for x in z]))


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_k1_domain(bad):
    with pytest.raises(ValueError):
        bessel_k1(bad)


def test_zk1_small_z_limit():
    assert zk1(1e-4) == pytest.approx(1.0, abs=1e-4)
    assert zk1(0.0) == 1.0


@given(st.floats(1e-4, 50.0), st.floats(1e-4, 50.0))
def test_zk1_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert zk1(lo) >= zk1(hi)


def test_wplus_prefactor_value():
    ctx = ctx_for()
    kT = ctx.kT
    sp = PRESETS["rb87"]
    ref = 4 * sp.mass * (sp.scattering_length * kT) ** 2 / (math.pi * CONSTANTS.hbar ** 3)
    ref *= math.exp(0.6) * zk1(ctx.mu_n(0.0) / kT)
    assert w_plus(0.0, ctx) == pytest.approx(ref, rel=1e-14)


@settings(max_examples=300)
@given(n=st.floats(0.0, 1e7), temp=st.floats(50e-9, 2e-6), mu_frac=st.floats(0.0, 3.0),
       f=st.floats(5.0, 2000.0))
def test_detailed_balance_identity(n, temp, mu_frac, f):
    ctx = ctx_for(f=f, temp=temp, mu_frac=mu_frac)
    ratio = w_plus(n, ctx) / w_minus(n, ctx)
    assert ratio == pytest.approx(math.exp((ctx.mu - ctx.mu_n(n)) / ctx.kT), rel=1e-12)


def test_balance_point_rates_equal():
    ctx = ctx_for()
    ns = stationary_point(ctx)
    # at mu_n = mu the two rates coincide; the stationary point sits just above
    assert w_minus(ns, ctx) > w_plus(ns, ctx)
    assert w_minus(ns, ctx) / w_plus(ns, ctx) - 1 < 1e-4


def test_stationary_point_vs_bisection():
    ctx = ctx_for()
    assert stationary_point(ctx) == pytest.approx(stationary_point_bisection(ctx), rel=1e-12)


def test_net_rate_sign_around_fixed_point():
    ctx = ctx_for()
    ns = stationary_point(ctx)
    assert net_growth_rate(0.5 * ns, ctx) > 0
    assert net_growth_rate(2.0 * ns, ctx) < 0
    assert abs(net_growth_rate(ns, ctx)) < 1e-6 * w_plus(ns, ctx) * ns


def test_net_rate_at_zero_is_spontaneous():
    ctx = ctx_for()
    assert net_growth_rate(0.0, ctx) == pytest.approx(2 * w_plus(0.0, ctx))


def test_rate_scale_hook():
    a, b = ctx_for(), ctx_for(rate_scale=3.0)
    assert w_plus(10.0, b) == pytest.approx(3 * w_plus(10.0, a))


def test_zero_w_minus_hook():
    ctx = ctx_for(w_plus_const=5.0, zero_w_minus=True)
    assert w_minus(100.0, ctx) == 0.0
    assert net_growth_rate(3.0, ctx) == pytest.approx(2 * 5.0 * 4.0)


def test_rates_quadratic_in_a():
    m1 = ChemPotentialModel(PRESETS["rb87"], Trap.from_hz(100.0))
    m2 = ChemPotentialModel(PRESETS["rb87"].with_scattering_length(2 * 5.71e-9), Trap.from_hz(100.0))
    c1, c2 = RateContext(m1, 5e-7, 1e-30), RateContext(m2, 5e-7, 1e-30)
    assert c2.prefactor == pytest.approx(4 * c1.prefactor)


def test_large_exponent_clamped(caplog):
    ctx = ctx_for(temp=1e-9, mu_frac=500.0)
    with caplog.at_level("WARNING"):
        v = w_plus(0.0, ctx)
    assert np.isfinite(v)
    assert "clamped" in caplog.text
