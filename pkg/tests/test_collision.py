import math

import numpy as np
import pytest

from becgrowth.chempot import ChemPotentialModel, gpe_ground_state
from becgrowth.collision import (CollisionIntegralSpec, InsufficientSamplesError, analytic_w_plus,
                                 mc_w_minus, mc_w_plus, momentum_density, shape_check,
                                 wigner_narrowness_check, with_transition)
from becgrowth.core import CONSTANTS, PRESETS, Trap
from becgrowth.rates import RateContext, w_plus

T = 500e-9
KT = CONSTANTS.k_B * T
RB = PRESETS["rb87"]


def spec(**kw):
    base = dict(species=RB, temperature=T, mu=0.3 * KT, transition_energy=KT,
                samples=200_000, seed=1)
    base.update(kw)
    return CollisionIntegralSpec(**base)


def within(a, ea, b, eb, k=3.0):
    return abs(a - b) <= k * math.hypot(ea, eb)


def test_analytic_matches_rate_module():
    model = ChemPotentialModel(RB, Trap.from_hz(100.0))
    ctx = RateContext(model, T, 0.3 * KT)
    s = spec(transition_energy=ctx.mu_n(1e5))
    assert analytic_w_plus(s) == pytest.approx(w_plus(1e5, ctx), rel=1e-13)


@pytest.mark.parametrize("z", [0.5, 1.0, 3.0])
def test_mc_w_plus_absolute(z):
    r = mc_w_plus(spec(transition_energy=z * KT))
    assert r.passed, r.summary()
    assert r.stat_error > 0


def test_swap_order_unchanged():
    a = mc_w_plus(spec(seed=5))
    b = mc_w_plus(spec(seed=5, swap_order=True))
    assert within(a.mc_value, a.stat_error, b.mc_value, b.stat_error)


def test_independent_ladders_compatible():
    a = mc_w_plus(spec(seed=11))
    b = mc_w_plus(spec(seed=12, sigma_ladder=(1 / 6, 1 / 12, 1 / 24)))
    assert within(a.mc_value, a.stat_error, b.mc_value, b.stat_error)


def test_halving_sigma_below_extrapolation_error():
    r = mc_w_plus(spec(seed=3))
    assert abs(r.per_sigma[-1] - r.per_sigma[-2]) < r.stat_error


def test_u_squared_scaling():
    a = mc_w_plus(spec())
    b = mc_w_plus(spec(species=RB.with_scattering_length(2 * RB.scattering_length)))
    assert b.mc_value / a.mc_value == pytest.approx(4.0, rel=1e-12)


def test_detailed_balance_mc():
    s = spec(transition_energy=0.5 * KT, seed=21)
    p, m = mc_w_plus(s), mc_w_minus(s)
    ratio = p.mc_value / m.mc_value
    err = ratio * math.hypot(p.stat_error / p.mc_value, m.stat_error / m.mc_value)
    assert abs(ratio - math.exp(-0.2)) <= 3 * err


def test_balance_point_ratio_one():
    s = spec(transition_energy=0.3 * KT, seed=8)
    p, m = mc_w_plus(s), mc_w_minus(s)
    ratio = p.mc_value / m.mc_value
    err = ratio * math.hypot(p.stat_error / p.mc_value, m.stat_error / m.mc_value)
    assert abs(ratio - 1.0) <= 3 * err


def test_drop_final_occupation_kills_w_minus():
    r = mc_w_minus(spec(drop_final_occupation=True))
    assert r.mc_value == 0.0


def test_bose_enhancement():
    mu = -0.05 * KT
    b = mc_w_plus(spec(mu=mu, transition_energy=0.2 * KT, statistics="bose", seed=4))
    c = mc_w_plus(spec(mu=mu, transition_energy=0.2 * KT, seed=4))
    assert b.mc_value > c.mc_value + 3 * math.hypot(b.stat_error, c.stat_error)
    assert b.analytic_value is None and b.passed is None


def test_shape_check_small():
    rows = shape_check(RB, T, 0.3 * KT, zs=(0.5, 1.0, 2.0), samples=200_000, seed=2)
    assert all(r["passed"] for r in rows)
    assert rows[1]["mc_ratio"] == 1.0


def test_gaussian_condensate_close_to_delta():
    sig = 0.02 * math.sqrt(RB.mass * KT) / CONSTANTS.hbar
    a = mc_w_plus(spec(seed=6))
    g = mc_w_plus(spec(seed=6, condensate="gaussian", sigma_k=sig))
    assert g.mc_value == pytest.approx(a.mc_value, rel=0.05)


@pytest.mark.parametrize("kw", [dict(samples=100), dict(sigma_ladder=(0.1, -0.1)),
                                dict(statistics="fermi"), dict(statistics="bose"),
                                dict(condensate="gaussian")])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        spec(**kw)


def test_insufficient_ess():
    with pytest.raises(InsufficientSamplesError, match="increase the sample count"):
        mc_w_plus(spec(samples=10_000, sigma_ladder=(1e-5, 5e-6, 2.5e-6)))


def test_report_row_and_summary():
    r = mc_w_plus(spec())
    row = r.row()
    assert row["quantity"] == "W+" and row["passed"] in (True, False)
    assert "ratio" in r.summary()


def test_with_transition():
    s = spec()
    assert with_transition(s, 2 * KT).transition_energy == 2 * KT


@pytest.fixture(scope="module")
def rb_model():
    return ChemPotentialModel(RB, Trap.from_hz(100.0))


def test_narrowness_harmonic_limit():
    m = ChemPotentialModel(RB.with_scattering_length(0.0), Trap.from_hz(100.0))
    st = gpe_ground_state(1.0, m, n_points=2000)
    rep = wigner_narrowness_check(st, T, RB.mass)
    w = m.trap.omega_bar
    assert rep.norm == pytest.approx(1.0, abs=1e-4)
    assert rep.ratio == pytest.approx(math.sqrt(CONSTANTS.hbar * w / (2 * KT)), rel=1e-3)


def test_narrowness_shrinks_with_n(rb_model):
    small = wigner_narrowness_check(gpe_ground_state(1e3, rb_model), T, RB.mass)
    large = wigner_narrowness_check(gpe_ground_state(1e6, rb_model), T, RB.mass)
    assert large.condensate_width < small.condensate_width
    assert large.ratio < 0.1


def test_momentum_density_table_mode(rb_model):
    st = gpe_ground_state(1e5, rb_model, n_points=1500)
    dr = st.r[1] - st.r[0]
    k = np.linspace(0, math.pi / dr, 2000)
    s = spec(condensate="table", k_table=(k, momentum_density(st, k)), seed=7)
    r = mc_w_plus(s)
    assert r.mc_value == pytest.approx(r.analytic_value, rel=0.05)
