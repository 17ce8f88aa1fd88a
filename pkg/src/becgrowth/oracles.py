"""Independent reference evaluations by direct quadrature or root bracketing.

These deliberately avoid the code paths they check: no series, no
continued fractions, no incomplete-gamma library calls.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.sparse import diags


def k1_quadrature(z):
    """K1(z) = int_0^inf exp(-z cosh t) cosh t dt."""
    if not z > 0:
        raise ValueError("z must be > 0")
    # beyond t_max the integrand is below exp(-745) relative to its peak
    t_max = math.acosh(max(1.0, (745.0 + z) / z))
    t_peak = math.acosh(max(1.0, 1.0 / z)) if z < 1 else 0.0

    def f(t):
        return math.exp(-z * math.cosh(t) + z) * math.cosh(t)

    pts = [t_peak] if 0 < t_peak < t_max else None
    val, _ = quad(f, 0.0, t_max, points=pts, epsabs=0.0, epsrel=2e-14, limit=1000)
    return val * math.exp(-z)


def lower_gamma_quadrature(s, x):
    """int_0^x t^(s-1) exp(-t) dt."""
    val, _ = quad(lambda t: t ** (s - 1) * math.exp(-t), 0.0, x, epsabs=0.0, epsrel=2e-14,
                  limit=500)
    return val


def truncated_energy_integral(s, eta, kT):
    """int_0^(eta kT) E^(s-1) exp(-E/kT) dE, by quadrature in energy units."""
    val, _ = quad(lambda e: e ** (s - 1) * math.exp(-e / kT), 0.0, eta * kT, epsabs=0.0,
                  epsrel=2e-14, limit=500)
    return val


def retherm_quadrature_ratio(eta, kT=1.0):
    """T'/T after rethermalization, from energy-space quadrature of the truncated moments."""
    g3 = truncated_energy_integral(3, eta, kT)
    g4 = truncated_energy_integral(4, eta, kT)
    return g4 / (3.0 * kT * g3)


def bisect_root(f, lo, hi, tol=1e-13):
    """Plain bisection on a sign change (no interpolation)."""
    flo = f(lo)
    if flo * f(hi) > 0:
        raise ValueError("root not bracketed")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def stationary_point_bisection(ctx):
    """Fixed point of the growth law: (exp((mu_n - mu)/kT) - 1) n = 1."""
    def g(n):
        return math.expm1((ctx.mu_n(n) - ctx.mu) / ctx.kT) * n - 1.0
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
    return bisect_root(g, 0.0, hi, tol=1e-15)


def master_equation_moments(chain, grid, n0=0, rtol=1e-8, atol=1e-12):
    """Exact mean and variance of the birth-death chain by integrating dp/dt = Q p.

    The state space is cut at the chain's table size (births from the last
    state are dropped); callers should check the returned edge mass.
    """
    b = np.array(chain.birth, dtype=float)
    d = np.array(chain.death, dtype=float)
    b[-1] = 0.0
    q = diags([-(b + d), b[:-1], d[1:]], [0, -1, 1], format="csc")
    p0 = np.zeros(b.size)
    p0[n0] = 1.0
    grid = np.asarray(grid, dtype=float)
    sol = solve_ivp(lambda t, p: q @ p, (grid[0], grid[-1]), p0, method="BDF", jac=q,
                    t_eval=grid, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise RuntimeError(f"master equation integration failed: {sol.message}")
    n = np.arange(b.size)
    mean = n @ sol.y
    var = (n ** 2) @ sol.y - mean ** 2
    return mean, var, float(np.max(sol.y[-1]))
