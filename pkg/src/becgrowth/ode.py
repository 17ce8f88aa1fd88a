"""Dormand-Prince 5(4) stepper with quartic dense output.

Kept deliberately small: scalar or vector state, a hook called after every
accepted step (which may change the right-hand side), and a veto for
physically invalid proposals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th and embedded 4th order weights (7 stages, FSAL)
E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Shampine's dense-output polynomial, y(t + th) = y + h K^T P [th, th^2, th^3, th^4]
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


class StepSizeUnderflow(RuntimeError):
    def __init__(self, t, y, h):
        self.t, self.y, self.h = t, y, h
        super().__init__(f"step size underflow at t={t!r}, y={y!r}, h={h!r}")


@dataclass
class Step:
    t0: float
    t1: float
    y0: np.ndarray
    y1: np.ndarray
    K: np.ndarray

    def __call__(self, t):
        h = self.t1 - self.t0
        th = (np.asarray(t, dtype=float) - self.t0) / h
        powers = np.stack([th, th ** 2, th ** 3, th ** 4])
        Q = self.K.T @ P
        return self.y0[:, None] + h * (Q @ powers) if np.ndim(t) else self.y0 + h * (Q @ powers)


@dataclass
class SolverStats:
    nfev: int = 0
    accepted: int = 0
    rejected: int = 0
    vetoed: int = 0


def _initial_step(f, t0, y0, f0, rtol, atol):
    # Hairer-Norsett-Wanner starting step heuristic, order 5
    scale = atol + rtol * np.abs(y0)
    d0 = np.linalg.norm(y0 / scale) / np.sqrt(y0.size)
    d1 = np.linalg.norm(f0 / scale) / np.sqrt(y0.size)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.linalg.norm((f1 - f0) / scale) / np.sqrt(y0.size) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(f, t0, y0, t_end, rtol=1e-8, atol=1e-10, on_step=None, veto=None,
              max_steps=1_000_000, h0=None):
    """Integrate y' = f(t, y) from t0 to t_end; returns :class:`SolverStats`.

    ``on_step(step)`` runs after every accepted :class:`Step` and may
    return a replacement right-hand side (used when the step changes the
    model, e.g. a bath update). ``veto(y)`` returning True rejects a
    proposed state and halves the step.
    """
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    t = float(t0)
    stats = SolverStats()

    def fe(tt, yy):
        stats.nfev += 1
        return np.atleast_1d(np.asarray(f(tt, yy), dtype=float))

    fy = fe(t, y)
    h = h0 if h0 is not None else _initial_step(fe, t, y, fy, rtol, atol)
    K = np.empty((7, y.size))
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            raise RuntimeError(f"max_steps={max_steps} exceeded at t={t}")
        h = min(h, t_end - t)
        if h <= 16 * np.finfo(float).eps * max(abs(t), 1e-300):
            raise StepSizeUnderflow(t, y, h)
        K[0] = fy
        for i in range(1, 6):
            dy = np.dot(K[:i].T, A[i]) * h
            K[i] = fe(t + C[i] * h, y + dy)
        y_new = y + h * np.dot(K[:6].T, B)
        if veto is not None and veto(y_new):
            stats.vetoed += 1
            h *= 0.5
            continue
        f_new = fe(t + h, y_new)
        K[6] = f_new
        err = h * np.dot(K.T, E)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.linalg.norm(err / scale) / np.sqrt(y.size)
        if err_norm > 1.0:
            stats.rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
            continue
        stats.accepted += 1
        steps += 1
        step = Step(t, t + h, y.copy(), y_new.copy(), K.copy())
        t = t + h if t + h < t_end else t_end
        y = y_new
        fy = f_new
        if on_step is not None:
            new_f = on_step(step)
            if new_f is not None:
                f = new_f
                fy = fe(t, y)
        factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
        h *= max(MIN_FACTOR, factor)
    return stats
