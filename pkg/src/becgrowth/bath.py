"""Truncated-Boltzmann noncondensate bath.

Harmonic density of states E^2 / (2 (hbar w)^3), Boltzmann occupation,
zero population above the cut energy eta*k*T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gamma, gammainc

from .core import CONSTANTS


class BathFitError(RuntimeError):
    pass


def lower_gamma(s, x):
    """Lower incomplete gamma function (unregularized)."""
    if math.isinf(x):
        return gamma(s)
    return gamma(s) * gammainc(s, x)


def fraction_above_cut(eta, dos="quadratic"):
    """Fraction of a full Boltzmann distribution with energy above eta*k*T.

    ``quadratic`` is the harmonic-trap density of states (E^2), ``flat``
    an energy-independent one.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if dos == "quadratic":
        return (1.0 + eta + 0.5 * eta * eta) * math.exp(-eta)
    if dos == "flat":
        return math.exp(-eta)
    raise ValueError(f"unknown density of states {dos!r}")


@dataclass(frozen=True)
class BathMoments:
    atom_number: float
    energy: float

    @property
    def mean_energy(self):
        return self.energy / self.atom_number


@dataclass(frozen=True)
class TruncatedBath:
    temperature: float
    chemical_potential: float
    eta: float
    omega_bar: float
    constants: object = CONSTANTS

    def __post_init__(self):
        if not self.temperature > 0:
            raise BathFitError(f"bath temperature must be positive, got {self.temperature}")
        if not self.chemical_potential < self.eta * self.kT:
            raise BathFitError("bath chemical potential must lie below the cut")

    @property
    def kT(self):
        return self.constants.k_B * self.temperature

    @property
    def level_spacing(self):
        return self.constants.hbar * self.omega_bar


def _scale(kT, mu, spacing):
    return math.exp(mu / kT) * kT ** 3 / (2.0 * spacing ** 3)


def truncated_moments(bath):
    """Atom number and total energy of the truncated bath (closed form)."""
    c = _scale(bath.kT, bath.chemical_potential, bath.level_spacing)
    return BathMoments(atom_number=c * lower_gamma(3, bath.eta),
                       energy=c * bath.kT * lower_gamma(4, bath.eta))


def fit_truncated(moments, eta, omega_bar, constants=CONSTANTS):
    """The truncated bath (same eta) having the given atom number and energy.

    With eta fixed the mean energy per atom is kT g(4,eta)/g(3,eta), so the
    two-equation fit reduces to closed forms.
    """
    n, e = moments.atom_number, moments.energy
    if not (n > 0 and e > 0):
        raise BathFitError(f"cannot fit bath to N_nc={n!r}, E_nc={e!r}")
    g3, g4 = lower_gamma(3, eta), lower_gamma(4, eta)
    kT = (e / n) * g3 / g4
    spacing = constants.hbar * omega_bar
    mu = kT * math.log(n * 2.0 * spacing ** 3 / (kT ** 3 * g3))
    return TruncatedBath(kT / constants.k_B, mu, eta, omega_bar, constants)


def bath_for_number(atom_number, temperature, eta, omega_bar, constants=CONSTANTS):
    """Truncated bath at ``temperature`` holding ``atom_number`` atoms."""
    kT = constants.k_B * temperature
    spacing = constants.hbar * omega_bar
    mu = kT * math.log(atom_number * 2.0 * spacing ** 3 / (kT ** 3 * lower_gamma(3, eta)))
    return TruncatedBath(temperature, mu, eta, omega_bar, constants)


def retherm(bath):
    """(T', mu') of the full Boltzmann bath with the same atom number and energy."""
    g3, g4 = lower_gamma(3, bath.eta), lower_gamma(4, bath.eta)
    t_new = bath.temperature * g4 / (3.0 * g3)
    kT, kT_new = bath.kT, bath.constants.k_B * t_new
    # e^{mu'/kT'} kT'^3 = e^{mu/kT} kT^3 g(3,eta)/2
    mu_new = kT_new * (bath.chemical_potential / kT + 3.0 * math.log(kT / kT_new)
                       + math.log(g3 / 2.0))
    return t_new, mu_new


def couple_step(bath, delta_n, mu_n):
    """Move ``delta_n`` atoms into the condensate, each carrying energy ``mu_n``."""
    mom = truncated_moments(bath)
    new = BathMoments(mom.atom_number - delta_n, mom.energy - delta_n * mu_n)
    if not new.atom_number > 0:
        raise BathFitError(f"bath exhausted: N_nc would be {new.atom_number!r} "
                           f"(delta_n={delta_n!r}, state={bath!r})")
    return fit_truncated(new, bath.eta, bath.omega_bar, bath.constants)

