"""Scenario files: flat INI-style sections with unit-suffixed keys.

Example::

    [species]
    preset = rb87

    [trap]
    omega_x_hz = 100      ; trap frequency in Hz, omega = 2 pi * value
    omega_y_hz = 100
    omega_z_hz = 100

    [bath]
    temp_nK = 500
    mu_frac_kT = 0.3
    eta = 6
    mode = static

    [solver]
    t_end_s = 0.5
    rtol = 1e-8

    [output]
    dir = run1

Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import math

from .bath import bath_for_number
from .core import (AMU, CONSTANTS, PRESETS, BathMode, BathState, ConfigError, SimConfig,
                   SolverSettings, Species, Trap)

# SI keys (mass_kg, omega_x_rad_s, temp_K, mu_J, ...) are what manifests write,
# so a manifest reloads to the bit-identical configuration
SCHEMA = {
    "species": {"preset", "mass_amu", "mass_kg", "scattering_length_nm", "scattering_length_m",
                "label"},
    "trap": {"omega_x_hz", "omega_y_hz", "omega_z_hz",
             "omega_x_rad_s", "omega_y_rad_s", "omega_z_rad_s"},
    "bath": {"temp_nK", "temp_K", "mu_frac_kT", "mu_nK", "mu_J", "ntotal", "eta", "mode"},
    "solver": {"t_end_s", "rtol", "atol", "n_samples", "n_initial", "seed",
               "crossover_factor", "max_steps", "allow_negative_mu"},
    "output": {"dir", "plot"},
}
# written by manifests, ignored on load
PASSIVE_SECTIONS = {"run"}


def read_config_file(path):
    """Parse a scenario file into ``{section: {key: str}}`` with strict key checks."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    with open(path) as fh:
        cp.read_file(fh)
    errs = []
    out = {}
    for sec in cp.sections():
        if sec in PASSIVE_SECTIONS:
            continue
        if sec not in SCHEMA:
            errs.append(f"unknown section [{sec}]")
            continue
        for key, val in cp.items(sec):
            if key not in SCHEMA[sec]:
                errs.append(f"unknown key {sec}.{key}")
        out[sec] = dict(cp.items(sec))
    if errs:
        raise ConfigError(errs)
    return out


def _f(d, key, default=None):
    v = d.get(key)
    return default if v is None or v == "" else float(v)


MU_KEYS = ("mu_frac_kT", "mu_nK", "mu_J", "ntotal")


def _pick(d, section, *alternatives):
    """Value in SI units from whichever of the (key, scale) alternatives is present."""
    found = [(k, scale) for k, scale in alternatives if d.get(k) not in (None, "")]
    if len(found) > 1:
        raise ConfigError([f"{section}: give only one of {', '.join(k for k, _ in found)}"])
    if not found:
        return None
    k, scale = found[0]
    try:
        return float(d[k]) * scale
    except ValueError:
        raise ConfigError([f"{section}.{k}: not a number ({d[k]!r})"]) from None


def build_config(values):
    """Resolve a ``{section: {key: value}}`` mapping into a :class:`SimConfig`.

    Collects every missing or malformed entry before raising.
    """
    errs = []
    sp, tr, ba, so = (values.get(s, {}) for s in ("species", "trap", "bath", "solver"))

    species = None
    try:
        mass = _pick(sp, "species", ("mass_kg", 1.0), ("mass_amu", AMU))
        a = _pick(sp, "species", ("scattering_length_m", 1.0), ("scattering_length_nm", 1e-9))
        preset = sp.get("preset")
        if preset:
            if preset not in PRESETS:
                raise ConfigError([f"unknown preset {preset!r} (known: {sorted(PRESETS)})"])
            species = PRESETS[preset]
            if mass is not None:
                species = Species(mass, species.scattering_length, species.label)
            if a is not None:
                species = species.with_scattering_length(a)
        elif mass is not None and a is not None:
            species = Species(mass, a, sp.get("label", ""))
        else:
            errs.append("species: give a preset or both a mass and a scattering length")
    except ConfigError as e:
        errs += e.violations
    except ValueError as e:
        errs.append(f"species: {e}")

    trap = None
    try:
        ws = [_pick(tr, "trap", (f"omega_{ax}_rad_s", 1.0), (f"omega_{ax}_hz", 2 * math.pi))
              for ax in "xyz"]
        if ws[0] is None:
            errs.append("trap: omega_x_hz is required (trap frequencies have no default)")
        else:
            trap = Trap(*(ws[0] if w is None else w for w in ws))
    except ConfigError as e:
        errs += e.violations

    temp = None
    try:
        temp = _pick(ba, "bath", ("temp_K", 1.0), ("temp_nK", 1e-9))
    except ConfigError as e:
        errs += e.violations
    else:
        if temp is None:
            errs.append("bath: temp_nK is required")
        elif not temp > 0:
            errs.append(f"bath: temperature must be positive (got {temp} K)")
    eta = _f(ba, "eta", 6.0)
    mode = ba.get("mode", "static") or "static"
    try:
        mode = BathMode(mode)
    except ValueError:
        errs.append(f"bath: mode must be static or depleting (got {mode!r})")
    n_initial = _f(so, "n_initial", 0.0)

    given = [k for k in MU_KEYS if ba.get(k) not in (None, "")]
    mu = None
    if len(given) != 1:
        errs.append(f"bath: give exactly one of {', '.join(MU_KEYS)}")
    elif given[0] == "mu_J":
        mu = _f(ba, "mu_J")
    elif temp is not None and temp > 0:
        kT = CONSTANTS.k_B * temp
        if given[0] == "mu_frac_kT":
            mu = _f(ba, "mu_frac_kT") * kT
        elif given[0] == "mu_nK":
            mu = CONSTANTS.k_B * _f(ba, "mu_nK") * 1e-9
        elif trap is not None and eta > 0:
            n_nc = _f(ba, "ntotal") - n_initial
            if n_nc <= 0:
                errs.append("bath: ntotal must exceed n_initial")
            else:
                mu = bath_for_number(n_nc, temp, eta, trap.omega_bar).chemical_potential

    t_end = _f(so, "t_end_s")
    if t_end is None:
        errs.append("solver: t_end_s is required")
    seed = so.get("seed")
    if seed in (None, ""):
        seed = None
    else:
        try:
            seed = int(seed)   # full 64-bit range; no float round trip
        except ValueError:
            errs.append(f"solver.seed must be a non-negative integer (got {seed!r})")
            seed = None
    allow_neg = str(so.get("allow_negative_mu", "false")).lower() in ("1", "true", "yes")

    if errs:
        raise ConfigError(errs)
    solver = SolverSettings(rtol=_f(so, "rtol", 1e-8), atol=_f(so, "atol", 1e-10),
                            n_samples=int(_f(so, "n_samples", 501)),
                            max_steps=int(_f(so, "max_steps", 1_000_000)))
    return SimConfig(species=species, trap=trap,
                     bath=BathState(temp, mu, eta, mode),
                     t_end=t_end, n_initial=n_initial, solver=solver, seed=seed,
                     crossover_factor=_f(so, "crossover_factor", 2.0),
                     allow_negative_mu=allow_neg)


def config_to_sections(config):
    """Inverse of :func:`build_config`, in exact SI keys."""
    wx, wy, wz = config.trap.omega
    return {
        "species": {"mass_kg": repr(config.species.mass),
                    "scattering_length_m": repr(config.species.scattering_length),
                    "label": config.species.label},
        "trap": {"omega_x_rad_s": repr(wx), "omega_y_rad_s": repr(wy), "omega_z_rad_s": repr(wz)},
        "bath": {"temp_K": repr(config.bath.temperature),
                 "mu_J": repr(config.bath.chemical_potential),
                 "eta": repr(config.bath.eta), "mode": BathMode(config.bath.mode).value},
        "solver": {"t_end_s": repr(config.t_end), "rtol": repr(config.solver.rtol),
                   "atol": repr(config.solver.atol), "n_samples": str(config.solver.n_samples),
                   "n_initial": repr(config.n_initial),
                   "seed": "" if config.seed is None else str(config.seed),
                   "crossover_factor": repr(config.crossover_factor),
                   "max_steps": str(config.solver.max_steps),
                   "allow_negative_mu": str(config.allow_negative_mu).lower()},
    }
