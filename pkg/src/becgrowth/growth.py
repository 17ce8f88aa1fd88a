"""Deterministic condensate growth: integrate dn/dt for the mean number.

In the static mode the bath (T, mu) is fixed. In the depleting mode a
truncated bath loses every atom the condensate gains, each carrying the
condensate chemical potential, and (T, mu) are re-fitted after each
accepted step.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import ode
from .bath import TruncatedBath, couple_step, truncated_moments
from .core import BathMode, validate_config
from .rates import RateContext, net_growth_rate, w_plus


@dataclass
class GrowthTrajectory:
    t: np.ndarray
    n: np.ndarray
    mu_n: np.ndarray
    w_plus: np.ndarray
    bath_T: np.ndarray
    bath_mu: np.ndarray
    # depleting mode only (NaN otherwise)
    bath_N: np.ndarray = None
    bath_E: np.ndarray = None
    energy_transferred: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    CSV_COLUMNS = ("t_s", "n", "mu_n_J", "w_plus_per_s", "bath_T_K", "bath_mu_J")

    def columns(self):
        return (self.t, self.n, self.mu_n, self.w_plus, self.bath_T, self.bath_mu)

    def __len__(self):
        return len(self.t)


@dataclass
class GrowthMilestones:
    latency_time: float | None
    t10: float | None
    t90: float | None
    growth_time_10_90: float | None
    saturation_n: float | None
    saturation_reached: bool
    seed_threshold: float = 100.0

    def as_row(self):
        return {
            "seed_threshold": self.seed_threshold,
            "latency_time_s": self.latency_time,
            "t10_s": self.t10,
            "t90_s": self.t90,
            "growth_time_10_90_s": self.growth_time_10_90,
            "saturation_n": self.saturation_n,
            "saturation_reached": int(self.saturation_reached),
        }


def config_hash(config):
    return hashlib.sha256(repr(config).encode()).hexdigest()[:16]


class DepletingBath:
    """Single-writer bath stepper used by :func:`integrate_growth`."""

    def __init__(self, bath: TruncatedBath):
        self.bath = bath
        self.initial = bath
        self.transferred = 0.0

    def advance(self, delta_n, mu_avg):
        self.bath = couple_step(self.bath, delta_n, mu_avg)
        self.transferred += delta_n * mu_avg
        return self.bath


def initial_truncated_bath(config):
    b = config.bath
    return TruncatedBath(b.temperature, b.chemical_potential, b.eta,
                         config.trap.omega_bar, config.constants)


def integrate_growth(config, bath_coupling=None, t_eval=None, rate_hooks=None):
    """Integrate the mean-number growth law for ``config``.

    ``bath_coupling`` defaults to a :class:`DepletingBath` when the config's
    bath mode is depleting. ``rate_hooks`` are forwarded to
    :class:`RateContext` (test hooks such as ``rate_scale``).
    """
    validate_config(config)
    ctx = RateContext.from_config(config, **(rate_hooks or {}))
    if bath_coupling is None and BathMode(config.bath.mode) is BathMode.DEPLETING:
        bath_coupling = DepletingBath(initial_truncated_bath(config))
    if bath_coupling is not None:
        ctx = ctx.with_bath(bath_coupling.bath.temperature, bath_coupling.bath.chemical_potential)

    if t_eval is None:
        t_eval = np.linspace(0.0, config.t_end, config.solver.n_samples)
    t_eval = np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0 or t_eval[-1] > config.t_end:
        raise ValueError("t_eval must be strictly increasing within [0, t_end]")

    n_out = np.empty_like(t_eval)
    rows = {k: np.full_like(t_eval, np.nan) for k in ("T", "mu", "N", "E", "Q")}
    state = {"ctx": ctx, "i": 0}

    def record(i, n, bath, transferred):
        n_out[i] = n
        if bath is None:
            rows["T"][i], rows["mu"][i] = state["ctx"].temperature, state["ctx"].mu
        else:
            mom = truncated_moments(bath)
            rows["T"][i], rows["mu"][i] = bath.temperature, bath.chemical_potential
            rows["N"][i], rows["E"][i], rows["Q"][i] = mom.atom_number, mom.energy, transferred

    def rhs(t, y):
        return net_growth_rate(y[0], state["ctx"])

    # samples at t = 0 (and any before the first step end)
    while state["i"] < len(t_eval) and t_eval[state["i"]] <= 0.0:
        record(state["i"], config.n_initial,
               bath_coupling.bath if bath_coupling else None,
               bath_coupling.transferred if bath_coupling else 0.0)
        state["i"] += 1

    def on_step(step):
        i = state["i"]
        j = i
        while j < len(t_eval) and t_eval[j] <= step.t1 * (1 + 1e-15):
            j += 1
        n0 = float(step.y0[0])
        mu0 = state["ctx"].mu_n(n0)
        if j > i:
            ns = np.atleast_2d(step(t_eval[i:j]))[0]
            for k, nk in zip(range(i, j), ns):
                if bath_coupling is None:
                    record(k, nk, None, 0.0)
                else:
                    mu_avg = 0.5 * (mu0 + state["ctx"].mu_n(nk))
                    b = couple_step(bath_coupling.bath, nk - n0, mu_avg)
                    record(k, nk, b, bath_coupling.transferred + (nk - n0) * mu_avg)
            state["i"] = j
        if bath_coupling is None:
            return None
        n1 = float(step.y1[0])
        bath = bath_coupling.advance(n1 - n0, 0.5 * (mu0 + state["ctx"].mu_n(n1)))
        state["ctx"] = state["ctx"].with_bath(bath.temperature, bath.chemical_potential)
        return rhs

    stats = ode.integrate(rhs, 0.0, [config.n_initial], config.t_end,
                          rtol=config.solver.rtol, atol=config.solver.atol,
                          on_step=on_step, veto=lambda y: y[0] < 0,
                          max_steps=config.solver.max_steps)
    if state["i"] != len(t_eval):
        raise RuntimeError("dense output did not cover all sample times")

    # mu_n and W+ per sample use the bath in force at that sample
    mu_n = ctx.mu_n(n_out)
    wp = np.array([w_plus(nk, ctx.with_bath(T, mu)) for nk, T, mu in
                   zip(n_out, rows["T"], rows["mu"])]) if bath_coupling else w_plus(n_out, ctx)
    return GrowthTrajectory(
        t=t_eval, n=n_out, mu_n=np.asarray(mu_n, dtype=float), w_plus=np.asarray(wp, dtype=float),
        bath_T=rows["T"], bath_mu=rows["mu"], bath_N=rows["N"], bath_E=rows["E"],
        energy_transferred=rows["Q"],
        metadata={"config_hash": config_hash(config), "nfev": stats.nfev,
                  "accepted_steps": stats.accepted, "rejected_steps": stats.rejected,
                  "vetoed_steps": stats.vetoed,
                  "mode": "depleting" if bath_coupling else "static"},
    )


def _first_crossing(t, n, level):
    idx = np.nonzero(n >= level)[0]
    if idx.size == 0:
        return None
    i = idx[0]
    if i == 0:
        return float(t[0])
    t0, t1, n0, n1 = t[i - 1], t[i], n[i - 1], n[i]
    return float(t0 + (level - n0) * (t1 - t0) / (n1 - n0))


def extract_milestones(traj, seed_threshold=100.0, plateau_tol=1e-2):
    """Latency (first crossing of ``seed_threshold``), 10-90 % times, saturation.

    Saturation counts as reached when n changed by less than
    ``plateau_tol`` (relative) over the last 10 % of the time window.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    t, n = traj.t, traj.n
    final = float(n[-1])
    if not final > 0:
        return GrowthMilestones(None, None, None, None, None, False, seed_threshold)
    latency = _first_crossing(t, n, seed_threshold)
    t10 = _first_crossing(t, n, 0.1 * final)
    t90 = _first_crossing(t, n, 0.9 * final)
    k = np.searchsorted(t, t[-1] - 0.1 * (t[-1] - t[0]))
    reached = abs(final - n[k]) <= plateau_tol * final
    growth = t90 - t10 if (t10 is not None and t90 is not None) else None
    return GrowthMilestones(latency, t10, t90, growth, final, bool(reached), seed_threshold)


def total_growth_time(milestones):
    """Time from the start to 90 % of the saturation number."""
    return milestones.t90


def crossover_sensitivity(config, factors=(1.5, 2.0, 4.0), seed_threshold=100.0):
    """Milestones for several choices of the low-N interpolation anchor."""
    out = {}
    for f in factors:
        traj = integrate_growth(replace(config, crossover_factor=f))
        out[f] = extract_milestones(traj, seed_threshold)
    return out
