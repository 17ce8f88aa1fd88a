"""Monte Carlo evaluation of the condensate collision rates W+ and W-.

Brute-force estimate of the two-body collision integrals at the trap
centre, used to check the closed-form W+ and the detailed-balance ratio.

Sampling: K1, K2 are drawn from the Maxwell-Boltzmann momentum
distribution of the bath; the condensate momentum k from |xi~(k)|^2 (a
delta at k = 0 by default); K3 = K1 + K2 - k consumes the momentum delta
exactly. The energy delta is replaced by a normalized Gaussian of width
sigma_E and the result is extrapolated to sigma_E -> 0 linearly in
sigma_E^2, from a ladder of widths evaluated on the same samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import CONSTANTS, interaction_strength
from .rates import zk1

SIGMA_LADDER = (1 / 8, 1 / 16, 1 / 32)   # in units of k_B T
N_BATCHES = 20
MIN_ESS = 200.0


class InsufficientSamplesError(RuntimeError):
    pass


@dataclass(frozen=True)
class CollisionIntegralSpec:
    species: object
    temperature: float
    mu: float
    transition_energy: float               # hbar*omega = mu_n, J
    statistics: str = "boltzmann"          # "boltzmann" | "bose"
    condensate: str = "delta"              # "delta" | "gaussian" | "table"
    sigma_k: float = 0.0                   # 1/m, for "gaussian"
    k_table: tuple | None = None           # (k, |xi~(k)|^2) arrays, for "table"
    sigma_ladder: tuple = SIGMA_LADDER
    samples: int = 1_000_000
    seed: int = 0
    constants: object = CONSTANTS
    # test hooks
    swap_order: bool = False
    drop_final_occupation: bool = False

    def __post_init__(self):
        errs = []
        if self.samples < 10_000:
            errs.append("samples must be >= 1e4")
        if any(s <= 0 for s in self.sigma_ladder):
            errs.append("sigma ladder entries must be positive")
        if self.statistics not in ("boltzmann", "bose"):
            errs.append(f"unknown statistics {self.statistics!r}")
        if self.condensate not in ("delta", "gaussian", "table"):
            errs.append(f"unknown condensate form {self.condensate!r}")
        if self.condensate == "gaussian" and not self.sigma_k > 0:
            errs.append("gaussian condensate needs sigma_k > 0")
        if self.statistics == "bose" and self.mu >= 0:
            errs.append("bose statistics need mu < 0")
        if errs:
            raise ValueError("; ".join(errs))

    @property
    def kT(self):
        return self.constants.k_B * self.temperature


@dataclass
class OracleReport:
    quantity: str
    mc_value: float
    stat_error: float
    analytic_value: float | None
    sigmas: tuple                   # J
    per_sigma: tuple                # estimates at each smearing width
    per_sigma_error: tuple
    ess: float
    tolerance: float = 0.05
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self):
        return self.mc_value / self.analytic_value if self.analytic_value else math.nan

    @property
    def passed(self):
        if self.analytic_value is None:
            return None
        return abs(self.mc_value - self.analytic_value) < max(
            self.tolerance * abs(self.analytic_value), 3.0 * self.stat_error)

    def row(self):
        return {
            "quantity": self.quantity, "mc_value": self.mc_value, "stat_error": self.stat_error,
            "analytic_value": self.analytic_value, "ratio": self.ratio,
            "ess": self.ess, "passed": self.passed,
        }

    def summary(self):
        a = "n/a" if self.analytic_value is None else f"{self.analytic_value:.6g}"
        return (f"{self.quantity}: MC {self.mc_value:.6g} +/- {self.stat_error:.2g} 1/s, "
                f"analytic {a}, ratio {self.ratio:.4f}, ESS {self.ess:.0f}, "
                f"{'PASS' if self.passed else 'FAIL' if self.passed is not None else '-'}")


def analytic_w_plus(spec):
    """Closed-form Boltzmann-bath W+ at the given transition energy."""
    c = spec.constants
    m, a = spec.species.mass, spec.species.scattering_length
    pref = 4.0 * m * (a * spec.kT) ** 2 / (math.pi * c.hbar ** 3)
    return pref * math.exp(2.0 * spec.mu / spec.kT) * zk1(spec.transition_energy / spec.kT)


def _sample_condensate_k(spec, rng, size):
    if spec.condensate == "delta":
        return np.zeros((size, 3))
    if spec.condensate == "gaussian":
        return rng.normal(0.0, spec.sigma_k, size=(size, 3))
    k, dens = (np.asarray(x, dtype=float) for x in spec.k_table)
    w = 4 * math.pi * k ** 2 * dens
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(k))))
    cdf /= cdf[-1]
    kk = np.interp(rng.random(size), cdf, k)
    v = rng.normal(size=(size, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return kk[:, None] * v


def _occupation_weights(spec, e1, e2, e3, which):
    """Occupation product divided by the Maxwellian sampling density of K1, K2.

    Returned without the Z^2 normalization, which is applied by the caller.
    """
    b = 1.0 / spec.kT
    mu = spec.mu
    if spec.statistics == "boltzmann":
        if which == "plus":
            w = np.full_like(e1, math.exp(2 * b * mu))
        else:
            f3 = np.exp(b * (mu - e3))
            if spec.drop_final_occupation:
                f3 = np.zeros_like(f3)
            w = f3 * np.exp(b * (e1 + e2))
        return w
    # Bose-Einstein occupations, reweighted from the Maxwellian samples
    f1 = 1.0 / np.expm1(b * (e1 - mu))
    f2 = 1.0 / np.expm1(b * (e2 - mu))
    f3 = 1.0 / np.expm1(b * (e3 - mu))
    if spec.drop_final_occupation:
        f3 = np.zeros_like(f3)
    if which == "plus":
        occ = f1 * f2 * (1.0 + f3)
    else:
        occ = (1.0 + f1) * (1.0 + f2) * f3
    return occ * np.exp(b * (e1 + e2))


def _estimate(spec, which):
    c = spec.constants
    m, hbar = spec.species.mass, c.hbar
    kT = spec.kT
    u = interaction_strength(spec.species, c)
    sig_k = math.sqrt(m * kT) / hbar          # Maxwellian width per component
    Z = (2 * math.pi * m * kT / hbar ** 2) ** 1.5
    norm = u ** 2 / ((2 * math.pi) ** 5 * hbar ** 2) * Z ** 2 * hbar
    sigmas = np.array(spec.sigma_ladder) * kT
    rng = np.random.Generator(np.random.PCG64(spec.seed))

    n_b = N_BATCHES
    per_batch = spec.samples // n_b
    sums = np.zeros((n_b, len(sigmas)))
    sums_w2 = np.zeros(len(sigmas))
    sums_w = np.zeros(len(sigmas))
    for ib in range(n_b):
        ka = rng.normal(0.0, sig_k, size=(per_batch, 3))
        kb = rng.normal(0.0, sig_k, size=(per_batch, 3))
        K1, K2 = (kb, ka) if spec.swap_order else (ka, kb)
        kc = _sample_condensate_k(spec, rng, per_batch)
        K3 = K1 + K2 - kc
        e1 = hbar ** 2 * np.einsum("ij,ij->i", K1, K1) / (2 * m)
        e2 = hbar ** 2 * np.einsum("ij,ij->i", K2, K2) / (2 * m)
        e3 = hbar ** 2 * np.einsum("ij,ij->i", K3, K3) / (2 * m)
        occ = _occupation_weights(spec, e1, e2, e3, which)
        de = e1 + e2 - e3 - spec.transition_energy
        for j, s in enumerate(sigmas):
            g = np.exp(-0.5 * (de / s) ** 2) / (math.sqrt(2 * math.pi) * s)
            w = g * occ
            sums[ib, j] = w.mean()
            sums_w[j] += w.sum()
            sums_w2[j] += np.sum(w * w)
    ess = sums_w[-1] ** 2 / sums_w2[-1] if sums_w2[-1] > 0 else 0.0

    vals = norm * sums                    # (batches, sigmas)
    x = sigmas ** 2
    X = np.column_stack([np.ones_like(x), x])
    # batch-wise extrapolation: intercept of a least-squares line in sigma^2
    coef = np.linalg.lstsq(X, vals.T, rcond=None)[0]
    extrap = coef[0]
    mean_vals = vals.mean(axis=0)
    err_vals = vals.std(axis=0, ddof=1) / math.sqrt(n_b)
    value = float(extrap.mean())
    error = float(extrap.std(ddof=1) / math.sqrt(n_b))
    return value, error, tuple(sigmas), tuple(mean_vals), tuple(err_vals), ess


def _check_ess(ess, spec):
    if ess < MIN_ESS and not spec.drop_final_occupation:
        raise InsufficientSamplesError(
            f"effective sample size {ess:.0f} < {MIN_ESS:.0f}; increase the sample count")


def mc_w_plus(spec, tolerance=0.05):
    value, err, sig, per, per_err, ess = _estimate(spec, "plus")
    _check_ess(ess, spec)
    analytic = analytic_w_plus(spec) if spec.statistics == "boltzmann" else None
    return OracleReport("W+", value, err, analytic, sig, per, per_err, ess, tolerance)


def mc_w_minus(spec, tolerance=0.05):
    value, err, sig, per, per_err, ess = _estimate(spec, "minus")
    _check_ess(ess, spec)
    analytic = None
    if spec.statistics == "boltzmann" and not spec.drop_final_occupation:
        analytic = analytic_w_plus(spec) * math.exp((spec.transition_energy - spec.mu) / spec.kT)
    return OracleReport("W-", value, err, analytic, sig, per, per_err, ess, tolerance)


def shape_check(species, temperature, mu, zs=(0.2, 0.5, 1.0, 2.0, 4.0), z_ref=1.0,
                samples=1_000_000, seed=0, tolerance=0.05, constants=CONSTANTS):
    """Compare MC W+(z)/W+(z_ref) with zK1(z)/(z_ref K1(z_ref)).

    Returns rows with the ratio, its MC error and a pass flag
    (agreement within max(tolerance, 3 sigma)).
    """
    kT = constants.k_B * temperature

    def rep(z):
        spec = CollisionIntegralSpec(species, temperature, mu, z * kT, samples=samples,
                                     seed=seed, constants=constants)
        return mc_w_plus(spec)

    ref = rep(z_ref)
    rows = []
    for z in zs:
        r = ref if z == z_ref else rep(z)
        mc = r.mc_value / ref.mc_value
        err = mc * math.hypot(r.stat_error / r.mc_value, ref.stat_error / ref.mc_value) \
            if z != z_ref else 0.0
        target = float(zk1(z) / zk1(z_ref))
        ok = abs(mc - target) <= max(tolerance * target, 3.0 * err)
        rows.append({"z": z, "mc_ratio": mc, "mc_error": err, "analytic_ratio": target,
                     "rel_diff": mc / target - 1.0, "passed": ok, "report": r})
    return rows


# --------------------------------------------------------------------------
# momentum width of the condensate vs the bath

def momentum_density(gpe_state, k):
    """|xi~(k)|^2 of a radial GPE state, normalized so that int d^3k |xi~|^2 = 1."""
    r, xi = gpe_state.r, gpe_state.xi
    dr = r[1] - r[0]
    k = np.asarray(k, dtype=float)
    kr = np.outer(k, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        j0 = np.where(kr > 0, np.sin(kr) / np.where(kr > 0, kr, 1.0), 1.0)
    amp = (2 * math.pi) ** -1.5 * 4 * math.pi * (j0 @ (r ** 2 * xi)) * dr
    return amp ** 2


@dataclass
class NarrownessReport:
    condensate_width: float    # rms momentum per component, 1/m
    thermal_width: float       # sqrt(m k T)/hbar, 1/m
    norm: float                # int d^3k |xi~|^2 (should be ~1)

    @property
    def ratio(self):
        return self.condensate_width / self.thermal_width


def wigner_narrowness_check(gpe_state, temperature, mass, constants=CONSTANTS, n_k=3000):
    dr = gpe_state.r[1] - gpe_state.r[0]
    k = np.linspace(0.0, math.pi / dr, n_k)
    dens = momentum_density(gpe_state, k)
    w = 4 * math.pi * k ** 2 * dens
    norm = np.trapezoid(w, k)
    k2 = np.trapezoid(k ** 2 * w, k) / norm
    thermal = math.sqrt(mass * constants.k_B * temperature) / constants.hbar
    return NarrownessReport(math.sqrt(k2 / 3.0), thermal, float(norm))


def with_transition(spec, energy):
    return replace(spec, transition_energy=energy)
