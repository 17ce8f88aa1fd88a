"""Analytic condensate transition rates and the mean-number growth law.

``w_plus`` is the Boltzmann-bath collision rate into the condensate
mode, ``w_minus`` follows from detailed balance, and ``net_growth_rate``
is dn/dt for the mean condensate number.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .chempot import ChemPotentialModel, mu_condensate

log = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
EXP_CLAMP = 700.0
_SERIES_SPLIT = 2.0


def _k1_series(z):
    # K1(z) = 1/z + ln(z/2) I1(z) - (z/4) sum_k [psi(k+1)+psi(k+2)] (z^2/4)^k / (k! (k+1)!)
    y = 0.25 * z * z
    term = np.ones_like(z)          # (z^2/4)^k / (k! (k+1)!)
    psi1 = -EULER_GAMMA             # psi(k+1)
    psi2 = 1.0 - EULER_GAMMA        # psi(k+2)
    i1 = np.zeros_like(z)
    acc = np.zeros_like(z)
    for k in range(40):
        i1 += term
        acc += (psi1 + psi2) * term
        psi1 += 1.0 / (k + 1)
        psi2 += 1.0 / (k + 2)
        term = term * y / ((k + 1) * (k + 2))
    i1 *= 0.5 * z
    return 1.0 / z + np.log(0.5 * z) * i1 - 0.25 * z * acc


def _k1_scaled_cf(x):
    """exp(x) * K1(x) for x >= 2 by Steed's continued fraction (Temme's CF2, nu = 0)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 2000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < 1e-17):
            break
    h = a1 * h
    k0s = np.sqrt(math.pi / (2.0 * x)) / s
    return k0s * (x + 0.5 - h) / x


def bessel_k1(z):
    """Modified Bessel function of the second kind, order one.

    Power series below z = 2, continued fraction above. Returns 0 where
    K1 underflows. Accepts scalars or arrays.
    """
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("bessel_k1 domain error: z must be > 0")
    zz = np.atleast_1d(z)
    out = np.empty_like(zz)
    lo = zz < _SERIES_SPLIT
    if lo.any():
        out[lo] = _k1_series(zz[lo])
    if (~lo).any():
        x = zz[~lo]
        with np.errstate(under="ignore"):
            out[~lo] = _k1_scaled_cf(x) * np.exp(-x)
    return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def zk1(z):
    """z K1(z), continued to 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    zs = np.where(z > 0, z, 1.0)
    out = np.where(z > 0, zs * bessel_k1(zs), 1.0)
    return float(out) if out.ndim == 0 else out


def _clamped_exp(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > EXP_CLAMP):
        log.warning("exponent clamped at +/-%g (max |x| = %g)", EXP_CLAMP, float(np.max(np.abs(x))))
        x = np.clip(x, -EXP_CLAMP, EXP_CLAMP)
    return np.exp(x)


@dataclass(frozen=True)
class RateContext:
    """Everything the rates need: chemical-potential model plus bath (T, mu).

    ``rate_scale``, ``w_plus_const`` and ``zero_w_minus`` are test hooks.
    """

    model: ChemPotentialModel
    temperature: float
    mu: float
    rate_scale: float = 1.0
    w_plus_const: float | None = None
    zero_w_minus: bool = False

    @classmethod
    def from_config(cls, config, **hooks):
        model = ChemPotentialModel(config.species, config.trap, config.constants,
                                   config.crossover_factor)
        return cls(model, config.bath.temperature, config.bath.chemical_potential, **hooks)

    @property
    def constants(self):
        return self.model.constants

    @cached_property
    def kT(self):
        return self.constants.k_B * self.temperature

    @cached_property
    def prefactor(self):
        """4 m (a k T)^2 / (pi hbar^3), in 1/s."""
        m = self.model.species.mass
        a = self.model.species.scattering_length
        return 4.0 * m * (a * self.kT) ** 2 / (math.pi * self.constants.hbar ** 3)

    @cached_property
    def bath_factor(self):
        return float(_clamped_exp(2.0 * self.mu / self.kT))

    def with_bath(self, temperature, mu):
        return replace(self, temperature=temperature, mu=mu)

    def mu_n(self, n):
        return mu_condensate(n, self.model)


def w_plus(n, ctx):
    if ctx.w_plus_const is not None:
        return ctx.rate_scale * ctx.w_plus_const * np.ones_like(np.asarray(n, dtype=float)) \
            if np.ndim(n) else ctx.rate_scale * ctx.w_plus_const
    z = ctx.mu_n(n) / ctx.kT
    return ctx.rate_scale * ctx.prefactor * ctx.bath_factor * zk1(z)


def balance_factor(n, ctx):
    """exp((mu_n - mu)/kT), clamped."""
    out = _clamped_exp((ctx.mu_n(n) - ctx.mu) / ctx.kT)
    return float(out) if np.ndim(out) == 0 else out


def w_minus(n, ctx):
    if ctx.zero_w_minus:
        return 0.0 * w_plus(n, ctx)
    return w_plus(n, ctx) * balance_factor(n, ctx)


def net_growth_rate(n, ctx):
    """dn/dt = 2 W+(n) [ (1 - exp((mu_n - mu)/kT)) n + 1 ]."""
    if ctx.zero_w_minus:
        return 2.0 * w_plus(n, ctx) * (np.asarray(n) + 1.0)
    return 2.0 * w_plus(n, ctx) * (-np.expm1((ctx.mu_n(n) - ctx.mu) / ctx.kT) * n + 1.0)


def stationary_point(ctx):
    """Root of (exp((mu_n - mu)/kT) - 1) n = 1, by bracketing."""
    def f(n):
        return math.expm1((ctx.mu_n(n) - ctx.mu) / ctx.kT) * n - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e30:
            raise ValueError("no stationary point below 1e30 atoms")
    return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
