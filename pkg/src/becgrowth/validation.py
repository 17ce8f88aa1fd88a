"""Validation suites: each analytic shortcut against its independent check.

Every suite returns a list of :class:`Check` rows; ``run_suites`` is what
``becgrowth validate`` prints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bath as bathmod
from .chempot import ChemPotentialModel, gpe_ground_state, mu_thomas_fermi
from .collision import CollisionIntegralSpec, mc_w_minus, mc_w_plus, shape_check
from .core import CONSTANTS, PRESETS, Trap
from .oracles import k1_quadrature, retherm_quadrature_ratio
from .rates import RateContext, bessel_k1, w_minus, w_plus

SUITES = ("bessel", "cut-fractions", "detailed-balance", "collision-mc", "gpe", "retherm")

# quoted percentages above the cut (quadratic and flat density of states)
QUOTED_CUT_FRACTIONS = {
    (5.0, "quadratic"): 12.5,
    (7.0, "quadratic"): 2.9,
    (5.0, "flat"): 0.67,
    (7.0, "flat"): 0.091,
}
CUT_TOLERANCE_PP = 0.05


@dataclass
class Check:
    suite: str
    check: str
    value: float
    target: float | None
    tolerance: float | None
    passed: bool

    def row(self):
        return [self.suite, self.check, self.value, self.target, self.tolerance,
                "PASS" if self.passed else "FAIL"]


HEADER = ["suite", "check", "value", "target", "tolerance", "result"]


@dataclass(frozen=True)
class ValidationSetup:
    """Reference scenario used by the suites (not a claim about any experiment)."""
    species: object = PRESETS["rb87"]
    trap_hz: float = 100.0
    temperature: float = 500e-9
    mu_frac_kT: float = 0.3
    samples: int = 1_000_000
    seed: int = 12345

    @property
    def trap(self):
        return Trap.from_hz(self.trap_hz)

    @property
    def kT(self):
        return CONSTANTS.k_B * self.temperature


def suite_bessel(setup=ValidationSetup()):
    z = np.logspace(-3, 2, 100)
    ref = np.array([k1_quadrature(x) for x in z])
    rel = float(np.max(np.abs(bessel_k1(z) / ref - 1.0)))
    small = 1e-4 * bessel_k1(1e-4)
    big = bessel_k1(50.0) * math.sqrt(2 * 50.0 / math.pi) * math.exp(50.0)
    # three terms of the large-z expansion, next term ~1e-8
    w = 8 * 50.0
    asym = 1 + 3 / w - 15 / (2 * w ** 2) + 315 / (6 * w ** 3)
    return [
        Check("bessel", "max rel err vs quadrature, 100 pts z in [1e-3,100]", rel, 0.0, 1e-10,
              rel <= 1e-10),
        Check("bessel", "z*K1(z) at z=1e-4", small, 1.0, 1e-4, 1 - 1e-4 <= small <= 1.0),
        Check("bessel", "K1(z) sqrt(2z/pi) e^z at z=50 vs asymptotic series", big, asym, 1e-7,
              abs(big - asym) <= 1e-7),
    ]


def suite_cut_fractions(setup=ValidationSetup()):
    out = []
    for (eta, dos), pct in QUOTED_CUT_FRACTIONS.items():
        val = 100.0 * bathmod.fraction_above_cut(eta, dos)
        out.append(Check("cut-fractions", f"percent above cut, eta={eta:g}, {dos} DOS", val, pct,
                         CUT_TOLERANCE_PP, abs(val - pct) <= CUT_TOLERANCE_PP))
    return out


def suite_detailed_balance(setup=ValidationSetup(), draws=1000):
    rng = np.random.Generator(np.random.PCG64(setup.seed))
    worst = 0.0
    for _ in range(draws):
        T = rng.uniform(50e-9, 2e-6)
        kT = CONSTANTS.k_B * T
        f = rng.uniform(5.0, 2000.0)
        model = ChemPotentialModel(setup.species, Trap.from_hz(f))
        mu = rng.uniform(0.0, 3.0) * kT
        ctx = RateContext(model, T, mu)
        n = 10 ** rng.uniform(0, 7) if rng.random() > 0.05 else 0.0
        ratio = w_plus(n, ctx) / w_minus(n, ctx)
        target = math.exp((mu - ctx.mu_n(n)) / kT)
        worst = max(worst, abs(ratio / target - 1.0))
    return [Check("detailed-balance", f"max rel residual W+/W- vs exp((mu-mu_n)/kT), {draws} draws",
                  worst, 0.0, 1e-12, worst < 1e-12)]


def suite_collision_mc(setup=ValidationSetup()):
    kT = setup.kT
    mu = setup.mu_frac_kT * kT
    rows = shape_check(setup.species, setup.temperature, mu, samples=setup.samples,
                       seed=setup.seed)
    out = [Check("collision-mc", f"W+(z)/W+(1) vs zK1 ratio, z={r['z']:g}", r["mc_ratio"],
                 r["analytic_ratio"], max(0.05, 3 * r["mc_error"] / r["analytic_ratio"]),
                 r["passed"]) for r in rows]
    spec = CollisionIntegralSpec(setup.species, setup.temperature, mu, 0.5 * kT,
                                 samples=setup.samples, seed=setup.seed + 1)
    rp, rm = mc_w_plus(spec), mc_w_minus(spec)
    ratio = rp.mc_value / rm.mc_value
    err = ratio * math.hypot(rp.stat_error / rp.mc_value, rm.stat_error / rm.mc_value)
    target = math.exp((mu - spec.transition_energy) / kT)
    out.append(Check("collision-mc", "MC W+/W- vs exp((mu-mu_n)/kT), z=0.5", ratio, target,
                     3 * err / target, abs(ratio - target) <= 3 * err))
    return out


def suite_gpe(setup=ValidationSetup(), n=1e6):
    model = ChemPotentialModel(setup.species, setup.trap)
    # dr = r_max / (n_points + 1): these two grids differ by exactly a factor 2 in dr
    coarse = gpe_ground_state(n, model, n_points=1999)
    fine = gpe_ground_state(n, model, n_points=3999)
    tf = mu_thomas_fermi(n, model)
    rel = abs(fine.mu_gpe - tf) / tf
    refine = abs(fine.mu_gpe - coarse.mu_gpe) / fine.mu_gpe
    return [
        Check("gpe", f"|mu_gpe - mu_TF|/mu_TF at n={n:g}", float(rel), 0.0, 0.05, rel < 0.05),
        Check("gpe", "grid refinement: rel change of mu_gpe on halving dr", refine, 0.0, 0.005,
              refine < 0.005),
        Check("gpe", "normalization 4 pi int r^2 xi^2 dr", fine.norm(), 1.0, 1e-8,
              abs(fine.norm() - 1) <= 1e-8),
        Check("gpe", "mu_gpe >= mu_TF", fine.mu_gpe / tf, 1.0, None, fine.mu_gpe >= tf),
    ]


def suite_retherm(setup=ValidationSetup(), draws=200):
    rng = np.random.Generator(np.random.PCG64(setup.seed))
    etas = rng.uniform(0.5, 20.0, draws)
    ok = 0
    for eta in etas:
        b = bathmod.TruncatedBath(setup.temperature, 0.0, float(eta), setup.trap.omega_bar)
        t_new, _ = bathmod.retherm(b)
        ok += t_new < b.temperature
    b5 = bathmod.TruncatedBath(setup.temperature, 0.0, 5.0, setup.trap.omega_bar)
    r5 = bathmod.retherm(b5)[0] / b5.temperature
    q5 = retherm_quadrature_ratio(5.0, setup.kT)
    return [
        Check("retherm", f"T' < T for {draws} random eta in (0.5, 20)", ok, draws, 0, ok == draws),
        Check("retherm", "T'/T at eta=5", r5, 0.840, 0.001, abs(r5 - 0.840) <= 0.001),
        Check("retherm", "T'/T at eta=5, incomplete gamma vs quadrature", r5, q5, 1e-10,
              abs(r5 / q5 - 1) <= 1e-10),
    ]


_RUNNERS = {
    "bessel": suite_bessel,
    "cut-fractions": suite_cut_fractions,
    "detailed-balance": suite_detailed_balance,
    "collision-mc": suite_collision_mc,
    "gpe": suite_gpe,
    "retherm": suite_retherm,
}


def run_suites(names, setup=ValidationSetup()):
    if "all" in names:
        names = SUITES
    unknown = [n for n in names if n not in _RUNNERS]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}; choose from "
                       f"{', '.join(SUITES + ('all',))}")
    checks = []
    for n in names:
        checks += _RUNNERS[n](setup)
    return checks
