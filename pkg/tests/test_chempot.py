import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from becgrowth.chempot import (ChemPotentialModel, NoCondensateError, gpe_ground_state,
                               mu_condensate, mu_noninteracting, mu_thomas_fermi, n_equilibrium)
from becgrowth.core import CONSTANTS, PRESETS, Trap


@pytest.fixture
def model():
    return ChemPotentialModel(PRESETS["rb87"], Trap.from_hz(100.0))


def test_mu0_is_zero_point_energy(model):
    assert model.mu0 == pytest.approx(1.5 * CONSTANTS.hbar * 2 * math.pi * 100.0)
    assert mu_noninteracting(model.trap) == model.mu0


def test_tf_matches_oscillator_length_form(model):
    # mu = (hbar wbar / 2) (15 N a / abar)^(2/5)
    sp = model.species
    w = model.trap.omega_bar
    abar = math.sqrt(CONSTANTS.hbar / (sp.mass * w))
    n = 1e6
    ref = 0.5 * CONSTANTS.hbar * w * (15 * n * sp.scattering_length / abar) ** 0.4
    assert mu_thomas_fermi(n, model) == pytest.approx(ref, rel=1e-12)


def test_tf_two_fifths_power(model):
    assert mu_thomas_fermi(32e5, model) / mu_thomas_fermi(1e5, model) == pytest.approx(4.0)


@pytest.mark.parametrize("preset", ["rb87", "na23"])
def test_n_equilibrium_inverts_tf(preset):
    m = ChemPotentialModel(PRESETS[preset], Trap.from_hz(150.0, 150.0, 20.0))
    mu = 0.3 * CONSTANTS.k_B * 500e-9
    assert mu_thomas_fermi(n_equilibrium(mu, m), m) == pytest.approx(mu, rel=1e-12)


def test_n_equilibrium_below_mu0(model):
    with pytest.raises(NoCondensateError, match="no macroscopic condensate"):
        n_equilibrium(0.5 * model.mu0, model)


def test_low_n_interpolation_endpoints(model):
    assert mu_condensate(0.0, model) == pytest.approx(model.mu0)
    nx = model.crossover_count
    assert mu_condensate(nx, model) == pytest.approx(mu_thomas_fermi(nx, model))
    assert mu_condensate(10 * nx, model) == mu_thomas_fermi(10 * nx, model)


@given(st.floats(0.0, 1e8), st.floats(0.0, 1e8))
def test_mu_condensate_monotone(a, b):
    m = ChemPotentialModel(PRESETS["rb87"], Trap.from_hz(100.0))
    lo, hi = sorted((a, b))
    assert mu_condensate(lo, m) <= mu_condensate(hi, m)


@given(st.floats(1.0, 1e8))
def test_mu_condensate_at_least_mu0(n):
    m = ChemPotentialModel(PRESETS["na23"], Trap.from_hz(60.0))
    assert mu_condensate(n, m) >= m.mu0 * (1 - 1e-12)


def test_zero_a_gives_flat_mu():
    m = ChemPotentialModel(PRESETS["rb87"].with_scattering_length(0.0), Trap.from_hz(100.0))
    assert math.isinf(m.crossover_count)
    assert mu_condensate(1e6, m) == m.mu0


def test_gpe_harmonic_limit():
    m = ChemPotentialModel(PRESETS["rb87"].with_scattering_length(0.0), Trap.from_hz(100.0))
    st_ = gpe_ground_state(1.0, m, n_points=2000)
    assert st_.mu_gpe / m.mu0 == pytest.approx(1.0, abs=1e-5)
    assert st_.norm() == pytest.approx(1.0, abs=1e-10)


def test_gpe_approaches_tf_from_above(model):
    st_ = gpe_ground_state(1e6, model)
    tf = mu_thomas_fermi(1e6, model)
    assert 1.0 <= st_.mu_gpe / tf < 1.05


def test_gpe_energy_decreases(model):
    st_ = gpe_ground_state(1e4, model, n_points=1000)
    e = np.asarray(st_.energies)
    assert np.all(np.diff(e) <= 1e-12 * np.abs(e[1:]))


def test_gpe_csv(tmp_path, model):
    st_ = gpe_ground_state(1e3, model, n_points=500)
    p = tmp_path / "gpe.csv"
    st_.to_csv(p)
    assert p.read_text().splitlines()[0].startswith("r_m")
