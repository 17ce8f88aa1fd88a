import math
from dataclasses import replace

import pytest

from becgrowth.core import (AMU, CONSTANTS, PRESETS, BathState, ConfigError, SolverSettings,
                            Species, Trap, interaction_strength, validate_config)

from conftest import make_config


def test_presets_scattering_lengths():
    assert PRESETS["rb87"].scattering_length == pytest.approx(5.71e-9)
    assert PRESETS["na23"].scattering_length == pytest.approx(2.75e-9)
    assert PRESETS["rb87"].mass / AMU == pytest.approx(86.909, rel=1e-4)


def test_interaction_strength_formula():
    sp = PRESETS["rb87"]
    u = interaction_strength(sp)
    assert u == pytest.approx(4 * math.pi * sp.scattering_length * CONSTANTS.hbar ** 2 / sp.mass)


def test_interaction_quadratic_scaling_in_a():
    sp = PRESETS["na23"]
    assert interaction_strength(sp.with_scattering_length(2 * sp.scattering_length)) == \
        pytest.approx(2 * interaction_strength(sp))


def test_trap_geometry():
    tr = Trap.from_hz(10.0, 20.0, 40.0)
    assert tr.omega_bar == pytest.approx(2 * math.pi * 20.0)
    assert tr.omega_sum == pytest.approx(2 * math.pi * 70.0)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_trap_rejects_nonpositive(bad):
    with pytest.raises(ConfigError):
        Trap(bad, 1.0, 1.0)


def test_species_rejects_negative_a():
    with pytest.raises(ConfigError):
        Species(1e-25, -1e-9)


def test_zero_scattering_length_allowed():
    assert Species(1e-25, 0.0).scattering_length == 0.0


def test_valid_config_passes(rb_config):
    assert validate_config(rb_config) is rb_config


def test_negative_temperature_reported():
    cfg = make_config()
    cfg = replace(cfg, bath=replace(cfg.bath, temperature=-1.0))
    with pytest.raises(ConfigError) as ei:
        validate_config(cfg)
    assert any("temperature must be positive" in v for v in ei.value.violations)


def test_mu_above_cut_reported():
    with pytest.raises(ConfigError) as ei:
        validate_config(make_config(mu_frac=7.0, eta=6.0))
    assert any("exceeds cut" in v for v in ei.value.violations)


def test_all_violations_collected():
    cfg = make_config()
    cfg = replace(cfg, t_end=-1.0, n_initial=-3.0,
                  solver=SolverSettings(rtol=0.0, atol=-1.0, n_samples=1),
                  bath=BathState(500e-9, -1e-31, 6.0))
    with pytest.raises(ConfigError) as ei:
        validate_config(cfg)
    assert len(ei.value.violations) >= 6


def test_negative_mu_allowed_with_flag():
    cfg = replace(make_config(mu_frac=-0.1), allow_negative_mu=True)
    validate_config(cfg)
