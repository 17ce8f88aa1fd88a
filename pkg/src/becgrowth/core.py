"""Physical constants, species/trap/bath value types and config validation.

Everything is SI internally. Convenience units (nK, Hz, nm, amu) are
converted at the CLI/config boundary only.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import scipy.constants as sc

# external constant, not taken from the growth model itself
AMU = sc.physical_constants["atomic mass constant"][0]


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``violations`` holds every problem found, not only the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = sc.hbar
    k_B: float = sc.k

    def __post_init__(self):
        if not (self.hbar > 0 and self.k_B > 0):
            raise ConfigError(["hbar and k_B must be positive"])


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class Species:
    mass: float
    scattering_length: float
    label: str = ""

    def __post_init__(self):
        errs = []
        if not self.mass > 0:
            errs.append(f"species.mass must be positive (got {self.mass})")
        # a = 0 is allowed as the non-interacting limit; a < 0 is not supported
        if not self.scattering_length >= 0:
            errs.append(
                f"species.scattering_length must be >= 0 (got {self.scattering_length})")
        if errs:
            raise ConfigError(errs)

    def with_scattering_length(self, a):
        return dataclasses.replace(self, scattering_length=a)


@dataclass(frozen=True)
class Trap:
    omega_x: float
    omega_y: float
    omega_z: float

    def __post_init__(self):
        errs = [f"trap.{name} must be positive (got {w})"
                for name, w in zip(("omega_x", "omega_y", "omega_z"), self.omega)
                if not w > 0]
        if errs:
            raise ConfigError(errs)

    @classmethod
    def isotropic(cls, omega):
        return cls(omega, omega, omega)

    @classmethod
    def from_hz(cls, fx, fy=None, fz=None):
        fy = fx if fy is None else fy
        fz = fx if fz is None else fz
        return cls(2 * math.pi * fx, 2 * math.pi * fy, 2 * math.pi * fz)

    @property
    def omega(self):
        return (self.omega_x, self.omega_y, self.omega_z)

    @property
    def omega_product(self):
        return self.omega_x * self.omega_y * self.omega_z

    @property
    def omega_bar(self):
        """Geometric-mean angular frequency."""
        return self.omega_product ** (1.0 / 3.0)

    @property
    def omega_sum(self):
        return self.omega_x + self.omega_y + self.omega_z


class BathMode(str, Enum):
    STATIC = "static"
    DEPLETING = "depleting"


@dataclass(frozen=True)
class BathState:
    """Thermal noncondensate bath: temperature, chemical potential, cut.

    Invariants are checked by :func:`validate_config` (and by
    :meth:`check`), not at construction, so that every violation can be
    collected at once.
    """

    temperature: float
    chemical_potential: float
    eta: float = 6.0
    mode: BathMode = BathMode.STATIC

    def kT(self, constants=CONSTANTS):
        return constants.k_B * self.temperature

    def check(self, constants=CONSTANTS, allow_negative_mu=False):
        errs = []
        if not self.temperature > 0:
            errs.append(f"temperature must be positive (got {self.temperature} K)")
        if not self.eta > 0:
            errs.append(f"eta must be positive (got {self.eta})")
        if not allow_negative_mu and self.chemical_potential < 0:
            errs.append("chemical_potential must be >= 0 "
                        f"(got {self.chemical_potential} J)")
        if self.temperature > 0 and self.eta > 0:
            cut = self.eta * constants.k_B * self.temperature
            if not self.chemical_potential < cut:
                errs.append(f"chemical_potential exceeds cut: {self.chemical_potential} J "
                            f">= eta*k_B*T = {cut} J")
        try:
            BathMode(self.mode)
        except ValueError:
            errs.append(f"mode must be one of {[m.value for m in BathMode]} (got {self.mode!r})")
        return errs


@dataclass(frozen=True)
class SolverSettings:
    rtol: float = 1e-8
    atol: float = 1e-10
    n_samples: int = 501
    max_steps: int = 1_000_000

    def check(self):
        errs = []
        if not self.rtol > 0:
            errs.append(f"solver.rtol must be positive (got {self.rtol})")
        if not self.atol > 0:
            errs.append(f"solver.atol must be positive (got {self.atol})")
        if self.n_samples < 2:
            errs.append(f"solver.n_samples must be >= 2 (got {self.n_samples})")
        return errs


@dataclass(frozen=True)
class SimConfig:
    species: Species
    trap: Trap
    bath: BathState
    t_end: float
    n_initial: float = 0.0
    solver: SolverSettings = field(default_factory=SolverSettings)
    seed: int | None = None
    crossover_factor: float = 2.0
    constants: PhysicalConstants = CONSTANTS
    allow_negative_mu: bool = False


def interaction_strength(species, constants=CONSTANTS):
    """Contact coupling u = 4 pi a hbar^2 / m, in J m^3."""
    return 4.0 * math.pi * species.scattering_length * constants.hbar ** 2 / species.mass


def validate_config(config):
    """Return ``config`` unchanged if valid, else raise ConfigError listing all violations."""
    errs = []
    errs += config.bath.check(config.constants, config.allow_negative_mu)
    errs += config.solver.check()
    if not config.t_end > 0:
        errs.append(f"t_end must be positive (got {config.t_end} s)")
    if not config.n_initial >= 0:
        errs.append(f"n_initial must be >= 0 (got {config.n_initial})")
    if not config.crossover_factor > 1:
        errs.append(f"crossover_factor must be > 1 (got {config.crossover_factor})")
    if config.seed is not None and config.seed < 0:
        errs.append(f"seed must be >= 0 (got {config.seed})")
    if errs:
        raise ConfigError(errs)
    return config


# Standard atomic masses (not part of the growth model; overridable).
# Scattering lengths are the values quoted for the original Rb and Na runs.
PRESETS = {
    "rb87": Species(mass=86.909180527 * AMU, scattering_length=5.71e-9, label="87Rb"),
    "na23": Species(mass=22.9897692820 * AMU, scattering_length=2.75e-9, label="23Na"),
}
