"""Condensate chemical potential.

Closed forms (non-interacting, Thomas-Fermi, low-N interpolation and its
inverse) plus a radial Gross-Pitaevskii ground-state solver used as an
independent numerical check of the Thomas-Fermi branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

from .core import CONSTANTS, interaction_strength


class NoCondensateError(ValueError):
    pass


class GpeConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual norm {residual:.3e})")


@dataclass(frozen=True)
class ChemPotentialModel:
    species: object
    trap: object
    constants: object = CONSTANTS
    # upper anchor of the low-N line: mu_TF(N_x) = crossover_factor * mu(0)
    crossover_factor: float = 2.0

    @cached_property
    def u(self):
        return interaction_strength(self.species, self.constants)

    @cached_property
    def mu0(self):
        return mu_noninteracting(self.trap, self.constants)

    @cached_property
    def tf_coefficient(self):
        """C such that mu_TF(n) = C * n**0.4."""
        m = self.species.mass
        base = 15.0 * self.u * self.trap.omega_product * m ** 1.5 / (16.0 * math.pi * math.sqrt(2.0))
        return base ** 0.4

    @cached_property
    def crossover_count(self):
        if self.u == 0:
            return math.inf
        return n_equilibrium(self.crossover_factor * self.mu0, self)


def mu_noninteracting(trap, constants=CONSTANTS):
    return 0.5 * constants.hbar * trap.omega_sum


def mu_thomas_fermi(n, model):
    n = np.asarray(n, dtype=float)
    out = model.tf_coefficient * n ** 0.4
    return float(out) if out.ndim == 0 else out


def mu_condensate(n, model):
    """Thomas-Fermi mu_n, replaced below N_x by the straight line from (0, mu(0))."""
    n = np.asarray(n, dtype=float)
    nx = model.crossover_count
    if math.isinf(nx):
        out = np.full_like(n, model.mu0)
    else:
        mux = model.tf_coefficient * nx ** 0.4
        line = model.mu0 + (mux - model.mu0) * (n / nx)
        out = np.where(n >= nx, model.tf_coefficient * np.maximum(n, 0.0) ** 0.4, line)
    return float(out) if out.ndim == 0 else out


def n_equilibrium(mu_bath, model):
    """Atom number at which the Thomas-Fermi mu equals ``mu_bath``."""
    if not mu_bath > model.mu0:
        raise NoCondensateError(
            f"no macroscopic condensate in equilibrium: mu={mu_bath:.6e} J <= mu(0)={model.mu0:.6e} J")
    if model.u == 0:
        raise NoCondensateError("no macroscopic condensate in equilibrium: zero interaction strength")
    m = model.species.mass
    return (16.0 * math.pi * math.sqrt(2.0) * mu_bath ** 2.5
            / (15.0 * model.u * model.trap.omega_product * m ** 1.5))


# --------------------------------------------------------------------------
# Gross-Pitaevskii oracle

@dataclass
class GpeGroundState:
    r: np.ndarray          # m
    xi: np.ndarray         # m^-3/2, 4 pi int r^2 xi^2 dr = 1
    mu_gpe: float          # J
    atom_count: float
    energy_per_atom: float  # J
    iterations: int
    energies: np.ndarray = field(repr=False, default=None)  # per iteration, units of hbar*omega_bar

    def norm(self):
        dr = self.r[1] - self.r[0]
        return 4 * math.pi * float(np.sum(self.r ** 2 * self.xi ** 2)) * dr

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.r, self.xi]), delimiter=",",
                   header="r_m,xi_m-1.5", comments="", fmt="%.17g")


def _functionals(u, r, dr, g):
    """Energy and mu per atom (oscillator units) of the radial function u = r*xi."""
    up = np.concatenate(([0.0], u, [0.0]))
    kin = 0.5 * np.sum(np.diff(up) ** 2) / dr
    pot = 0.5 * np.sum(r ** 2 * u ** 2) * dr
    inter = g * np.sum(u ** 4 / r ** 2) * dr
    s = 4 * math.pi
    return s * (kin + pot + 0.5 * inter), s * (kin + pot + inter)


def gpe_ground_state(n, model, r_max=None, n_points=4000, dt=None, tol=1e-9,
                     max_iter=200_000):
    """Spherical GPE ground state by normalized imaginary-time propagation.

    The trap is replaced by the isotropic trap at the geometric-mean
    frequency. Each step is backward Euler in imaginary time with the
    mean-field term frozen at the previous iterate (tridiagonal solve),
    followed by renormalization. Steps that would raise the energy are
    retried with half the time step, so the recorded energy sequence is
    nonincreasing.

    ``r_max`` is in units of the oscillator length; by default it is
    max(8, 1.6 R_TF).
    """
    if not n > 0:
        raise ValueError("gpe_ground_state needs n > 0")
    hbar = model.constants.hbar
    m = model.species.mass
    w = model.trap.omega_bar
    aho = math.sqrt(hbar / (m * w))
    g = 4 * math.pi * n * model.species.scattering_length / aho

    mu_tf = 0.5 * (15 * n * model.species.scattering_length / aho) ** 0.4
    r_tf = math.sqrt(2 * mu_tf)
    if r_max is None:
        r_max = max(8.0, 1.6 * r_tf)
    if r_max <= r_tf:
        raise ValueError(f"grid r_max={r_max} must exceed the Thomas-Fermi radius {r_tf:.3f}")
    dr = r_max / (n_points + 1)
    r = dr * np.arange(1, n_points + 1)

    # start from a TF profile smoothed by the oscillator ground state
    tf = np.sqrt(np.maximum(mu_tf - 0.5 * r ** 2, 0.0) / max(g, 1e-300)) if g > 0 else 0.0
    u = r * (tf + np.exp(-0.5 * r ** 2))
    u /= math.sqrt(4 * math.pi * np.sum(u ** 2) * dr)

    if dt is None:
        dt = 0.5 / max(1.0, mu_tf)
    off = -0.5 / dr ** 2
    ab = np.empty((3, n_points))
    ab[0, 1:] = off
    ab[2, :-1] = off
    ab[0, 0] = ab[2, -1] = 0.0

    energy, mu = _functionals(u, r, dr, g)
    energies = [energy]
    it = 0
    residual = math.inf
    while it < max_iter:
        it += 1
        ab[1] = 1.0 + dt * (1.0 / dr ** 2 + 0.5 * r ** 2 + g * u ** 2 / r ** 2)
        ab[0, 1:] = dt * off
        ab[2, :-1] = dt * off
        v = solve_banded((1, 1), ab, u)
        v /= math.sqrt(4 * math.pi * np.sum(v ** 2) * dr)
        e_new, mu_new = _functionals(v, r, dr, g)
        if e_new > energy * (1 + 1e-14) + 1e-300:
            dt *= 0.5
            if dt < 1e-12:
                raise GpeConvergenceError("imaginary-time step underflow", residual)
            continue
        dmu = abs(mu_new - mu) / abs(mu_new)
        u, energy, mu = v, e_new, mu_new
        energies.append(energy)
        if dmu < tol:
            vp = np.concatenate(([0.0], u, [0.0]))
            hu = -0.5 * (vp[2:] - 2 * u + vp[:-2]) / dr ** 2 + (0.5 * r ** 2 + g * u ** 2 / r ** 2) * u
            residual = math.sqrt(4 * math.pi * np.sum((hu - mu * u) ** 2) * dr)
            if residual < 1e-4 * max(1.0, mu):
                break
        # slowly lengthen the step once things are stable
        dt = min(dt * 1.02, 50.0 / max(1.0, mu_tf))
    else:
        vp = np.concatenate(([0.0], u, [0.0]))
        hu = -0.5 * (vp[2:] - 2 * u + vp[:-2]) / dr ** 2 + (0.5 * r ** 2 + g * u ** 2 / r ** 2) * u
        residual = math.sqrt(4 * math.pi * np.sum((hu - mu * u) ** 2) * dr)
        raise GpeConvergenceError(f"no convergence after {max_iter} iterations", residual)

    e_unit = hbar * w
    xi = (u / r) * aho ** -1.5
    return GpeGroundState(r=r * aho, xi=xi, mu_gpe=mu * e_unit, atom_count=n,
                          energy_per_atom=energy * e_unit, iterations=it,
                          energies=np.array(energies))
