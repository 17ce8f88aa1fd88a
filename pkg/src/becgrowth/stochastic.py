"""Birth-death master equation for the condensate number.

Birth N -> N+1 at 2 (N+1) W+(N), death N -> N-1 at 2 N W-(N). Exact
trajectories by the direct (Gillespie) method, ensembles on a fixed time
grid, and the stationary law of the chain.

Random numbers: one PCG64 stream per trajectory, spawned from the master
seed with ``numpy.random.SeedSequence``; uniforms and exponentials are
drawn in fixed-size blocks so a seed pins the trajectory bit for bit
(for a given NumPy version).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .core import validate_config
from .rates import RateContext, stationary_point, w_minus, w_plus

BLOCK = 1 << 14

_DONE, _NEED_RANDOMS, _OVERFLOW, _LOG_FULL = 0, 1, 2, 3


class TailMassError(ValueError):
    pass


@dataclass
class BirthDeathChain:
    """Tabulated birth and death rates for N = 0 .. n_max.

    W+ is evaluated once per integer N (it needs K1), which is the
    memoization the event loop relies on.
    """

    ctx: RateContext
    n_max: int
    birth: np.ndarray = field(init=False, repr=False)
    death: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = np.arange(self.n_max + 1, dtype=float)
        self.birth = 2.0 * (n + 1.0) * np.asarray(w_plus(n, self.ctx), dtype=float)
        self.death = 2.0 * n * np.asarray(w_minus(n, self.ctx), dtype=float)
        self.death[0] = 0.0

    def grown(self):
        return BirthDeathChain(self.ctx, 2 * self.n_max + 1)


@njit(cache=True, nogil=True)
def _run(t, N, k, t_end, birth, death, exps, us, grid, gi, out, thr, t_hit,
         log_t, log_n, nlog, logging):
    nmax = birth.shape[0] - 1
    while True:
        if k >= exps.shape[0]:
            return t, N, k, gi, t_hit, nlog, _NEED_RANDOMS
        if logging and nlog >= log_t.shape[0]:
            return t, N, k, gi, t_hit, nlog, _LOG_FULL
        lp = birth[N]
        tot = lp + death[N]
        tn = t + exps[k] / tot if tot > 0.0 else np.inf
        while gi < grid.shape[0] and grid[gi] < tn:
            out[gi] = N
            gi += 1
        if tn > t_end:
            return t_end, N, k, gi, t_hit, nlog, _DONE
        if us[k] * tot < lp:
            N += 1
        else:
            N -= 1
        t = tn
        k += 1
        if N >= thr and t_hit < 0.0:
            t_hit = t
        if logging:
            log_t[nlog] = t
            log_n[nlog] = N
            nlog += 1
        if N >= nmax:
            return t, N, k, gi, t_hit, nlog, _OVERFLOW


@dataclass
class StochasticTrajectory:
    grid: np.ndarray
    n: np.ndarray                  # state at each grid time
    first_passage: float | None    # first time N >= threshold
    seed: object
    events: np.ndarray | None = None   # (t, N, direction) rows when logged


def _simulate(chain, t_end, grid, seed_seq, n0=0, threshold=100, log_events=False):
    """One trajectory; the rate table is doubled (and the run repeated) on overflow."""
    while True:
        rng = np.random.Generator(np.random.PCG64(seed_seq))
        out = np.zeros(grid.shape[0], dtype=np.int64)
        cap = BLOCK if log_events else 0
        log_t, log_n = np.empty(cap), np.empty(cap, dtype=np.int64)
        chunks = []
        t, N, k, gi, nlog = 0.0, int(n0), 0, 0, 0
        t_hit = 0.0 if N >= threshold else -1.0
        exps, us = rng.standard_exponential(BLOCK), rng.random(BLOCK)
        while True:
            t, N, k, gi, t_hit, nlog, status = _run(
                t, N, k, t_end, chain.birth, chain.death, exps, us, grid, gi, out,
                threshold, t_hit, log_t, log_n, nlog, log_events)
            if status == _NEED_RANDOMS:
                exps, us = rng.standard_exponential(BLOCK), rng.random(BLOCK)
                k = 0
            elif status == _LOG_FULL:
                chunks.append((log_t[:nlog].copy(), log_n[:nlog].copy()))
                nlog = 0
            else:
                break
        if status == _OVERFLOW:
            chain = chain.grown()
            continue
        events = None
        if log_events:
            chunks.append((log_t[:nlog].copy(), log_n[:nlog].copy()))
            et = np.concatenate([c[0] for c in chunks])
            en = np.concatenate([c[1] for c in chunks])
            prev = np.concatenate(([n0], en[:-1]))
            events = np.column_stack([et, en, en - prev])
        traj = StochasticTrajectory(grid, out, None if t_hit < 0 else t_hit, seed_seq, events)
        return traj, chain


def _initial_table_size(ctx):
    if ctx.zero_w_minus or ctx.mu <= ctx.model.mu0 or ctx.model.u == 0:
        return 1023
    ns = stationary_point(ctx)
    return int(ns + 12.0 * math.sqrt(ns * max(1.0, ctx.kT / ctx.mu)) + 256)


def ssa_trajectory(config, seed, grid=None, threshold=100, log_events=False, rate_hooks=None,
                   chain=None):
    """One exact realization of the chain (static bath only)."""
    validate_config(config)
    if chain is None:
        ctx = RateContext.from_config(config, **(rate_hooks or {}))
        chain = BirthDeathChain(ctx, _initial_table_size(ctx))
    if grid is None:
        grid = np.linspace(0.0, config.t_end, config.solver.n_samples)
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    traj, _ = _simulate(chain, config.t_end, np.asarray(grid, dtype=float), seq,
                        n0=int(round(config.n_initial)), threshold=threshold,
                        log_events=log_events)
    return traj


QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass
class EnsembleStats:
    grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    quantiles: dict            # q -> array over grid
    minimum: np.ndarray
    maximum: np.ndarray
    first_passage: np.ndarray  # NaN where the threshold was never reached
    threshold: int
    M: int
    seed: int
    samples: np.ndarray = field(repr=False, default=None)  # (M, grid) states
    trajectories: list | None = None

    @property
    def std(self):
        return np.sqrt(self.variance)

    def clt_halfwidth(self, k=5.0):
        return k * self.std / math.sqrt(self.M)


def ensemble(config, M, seed, grid=None, threshold=100, workers=1, keep=False,
             rate_hooks=None):
    """M independent trajectories on a common grid.

    Trajectory i uses the i-th child of ``SeedSequence(seed)``, so results do
    not depend on ``workers``.
    """
    if M < 2:
        raise ValueError("ensemble needs M >= 2")
    validate_config(config)
    ctx = RateContext.from_config(config, **(rate_hooks or {}))
    chain = BirthDeathChain(ctx, _initial_table_size(ctx))
    if grid is None:
        grid = np.linspace(0.0, config.t_end, config.solver.n_samples)
    grid = np.asarray(grid, dtype=float)
    children = np.random.SeedSequence(seed).spawn(M)
    n0 = int(round(config.n_initial))

    # grow the shared table up front if the first trajectory needs it
    first, chain = _simulate(chain, config.t_end, grid, children[0], n0, threshold)

    def run(i):
        traj, _ = _simulate(chain, config.t_end, grid, children[i], n0, threshold)
        return traj

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rest = list(pool.map(run, range(1, M)))
    else:
        rest = [run(i) for i in range(1, M)]
    trajs = [first] + rest

    # Welford accumulation in index order
    mean = np.zeros(grid.shape[0])
    m2 = np.zeros(grid.shape[0])
    mat = np.empty((M, grid.shape[0]), dtype=np.int64)
    fp = np.full(M, np.nan)
    for i, tr in enumerate(trajs):
        x = tr.n.astype(float)
        d = x - mean
        mean += d / (i + 1)
        m2 += d * (x - mean)
        mat[i] = tr.n
        if tr.first_passage is not None:
            fp[i] = tr.first_passage
    qs = {q: np.quantile(mat, q, axis=0, method="inverted_cdf").astype(float) for q in QUANTILES}
    return EnsembleStats(grid=grid, mean=mean, variance=m2 / (M - 1), quantiles=qs,
                         minimum=mat.min(axis=0).astype(float), maximum=mat.max(axis=0).astype(float),
                         first_passage=fp, threshold=threshold, M=M, seed=seed, samples=mat,
                         trajectories=trajs if keep else None)


def log_ratio(n, ctx):
    """log p(n+1)/p(n) = log W+(n) - log W-(n+1) for the stationary law."""
    n = np.asarray(n, dtype=float)
    return np.log(w_plus(n, ctx)) - np.log(w_minus(n + 1.0, ctx))


def stationary_distribution(ctx, n_max, tail=1e-12):
    """Stationary law of the chain on {0..n_max}, built in log space.

    Raises :class:`TailMassError` when the mass beyond ``n_max`` (bounded by
    a geometric tail from the last ratio) exceeds ``tail``.
    """
    lr = log_ratio(np.arange(n_max), ctx)
    logp = np.concatenate(([0.0], np.cumsum(lr)))
    logp -= logsumexp(logp)
    r_last = float(np.exp(log_ratio(n_max, ctx)))
    if r_last >= 1.0:
        raise TailMassError(f"distribution still rising at N_max={n_max}; increase N_max")
    tail_mass = math.exp(logp[-1]) * r_last / (1.0 - r_last)
    if tail_mass > tail:
        raise TailMassError(f"tail mass {tail_mass:.2e} beyond N_max={n_max} exceeds {tail:.0e}; "
                            "increase N_max")
    return np.exp(logp)


def stationary_mode(p):
    return int(np.argmax(p))


def balance_identity_residual(n, ctx):
    """max |p(n+1)/p(n) * W-(n+1)/W+(n) - 1| from the log-space construction."""
    n = np.asarray(n, dtype=float)
    lr = log_ratio(n, ctx)
    return float(np.max(np.abs(np.exp(lr) * w_minus(n + 1.0, ctx) / w_plus(n, ctx) - 1.0)))

