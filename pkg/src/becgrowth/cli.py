"""Command line: ``becgrowth {grow,ssa,validate,sweep}``.

Exit codes: 0 ok, 1 validation failure, 2 usage/config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import itertools
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .bath import BathFitError
from .chempot import GpeConvergenceError, NoCondensateError
from .config import build_config, read_config_file
from .core import BathMode, ConfigError
from .growth import GrowthMilestones, extract_milestones, integrate_growth
from .io import write_columns, write_csv, write_dict_rows, write_manifest
from .ode import StepSizeUnderflow
from .stochastic import QUANTILES, TailMassError, ensemble, ssa_trajectory
from .validation import HEADER, ValidationSetup, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

# flag dest -> (section, key)
OVERRIDES = {
    "preset": ("species", "preset"),
    "mass_amu": ("species", "mass_amu"),
    "a_nm": ("species", "scattering_length_nm"),
    "temp_nK": ("bath", "temp_nK"),
    "mu_frac_kT": ("bath", "mu_frac_kT"),
    "mu_nK": ("bath", "mu_nK"),
    "ntotal": ("bath", "ntotal"),
    "eta": ("bath", "eta"),
    "bath": ("bath", "mode"),
    "t_end_s": ("solver", "t_end_s"),
    "n_initial": ("solver", "n_initial"),
    "rtol": ("solver", "rtol"),
    "atol": ("solver", "atol"),
    "samples": ("solver", "n_samples"),
    "seed": ("solver", "seed"),
    "crossover_factor": ("solver", "crossover_factor"),
}

# sweep axis name -> (section, key)
SWEEP_KEYS = {
    "temp_nK": ("bath", "temp_nK"),
    "mu_frac_kT": ("bath", "mu_frac_kT"),
    "eta": ("bath", "eta"),
    "a_nm": ("species", "scattering_length_nm"),
    "trap_hz": ("trap", None),
}


MILESTONE_KEYS = list(GrowthMilestones(None, None, None, None, None, False).as_row())


# keys that express the same quantity; setting one drops the others
ALTERNATIVES = [
    {"mass_amu", "mass_kg"},
    {"scattering_length_nm", "scattering_length_m"},
    {"temp_nK", "temp_K"},
    {"mu_frac_kT", "mu_nK", "mu_J", "ntotal"},
]


def _set(values, sec, key, value):
    d = values.setdefault(sec, {})
    for group in ALTERNATIVES:
        if key in group:
            for other in group - {key}:
                d.pop(other, None)
    d[key] = value


class UsageError(Exception):
    pass


def _scenario_args(p):
    g = p.add_argument_group("scenario")
    g.add_argument("--config", help="scenario file (INI sections with unit-suffixed keys)")
    g.add_argument("--preset", choices=("rb87", "na23"))
    g.add_argument("--mass-amu", dest="mass_amu")
    g.add_argument("--a-nm", dest="a_nm", help="s-wave scattering length (nm)")
    g.add_argument("--trap-hz", dest="trap_hz", nargs="+", metavar="F",
                   help="trap frequency in Hz: one value (isotropic) or three")
    g.add_argument("--temp-nK", dest="temp_nK")
    g.add_argument("--mu-frac-kT", dest="mu_frac_kT")
    g.add_argument("--mu-nK", dest="mu_nK")
    g.add_argument("--ntotal", help="total atom number; fixes the bath mu")
    g.add_argument("--eta", help="evaporation cut in units of kT")
    g.add_argument("--bath", choices=("static", "depleting"))
    g.add_argument("--t-end-s", dest="t_end_s")
    g.add_argument("--n-initial", dest="n_initial")
    g.add_argument("--rtol")
    g.add_argument("--atol")
    g.add_argument("--samples", help="number of output sample times")
    g.add_argument("--crossover-factor", dest="crossover_factor")
    g.add_argument("--seed")
    g.add_argument("--out", default=None, help="output directory")
    g.add_argument("--no-plot", action="store_true")


def resolve_sections(args):
    """Merge the scenario file (if any) with flag overrides."""
    values = read_config_file(args.config) if args.config else {}
    values = {k: dict(v) for k, v in values.items()}
    for dest, (sec, key) in OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is not None:
            _set(values, sec, key, str(v))
            # preset comes first in OVERRIDES, so --mass-amu/--a-nm still apply after it
            if key == "preset":
                for other in ("mass_amu", "mass_kg", "scattering_length_nm",
                              "scattering_length_m", "label"):
                    values["species"].pop(other, None)
    if args.trap_hz is not None:
        if len(args.trap_hz) not in (1, 3):
            raise UsageError("--trap-hz takes one or three values")
        fs = args.trap_hz * 3 if len(args.trap_hz) == 1 else args.trap_hz
        values["trap"] = dict(zip(("omega_x_hz", "omega_y_hz", "omega_z_hz"), fs))
    return values


def _out_dir(args, values, default):
    d = args.out or values.get("output", {}).get("dir") or default
    os.makedirs(d, exist_ok=True)
    return d


def _want_plot(args, values):
    if args.no_plot:
        return False
    return str(values.get("output", {}).get("plot", "true")).lower() not in ("0", "false", "no")


def _trajectory_rows(traj):
    return [np.asarray(c) for c in traj.columns()]


def cmd_grow(args):
    values = resolve_sections(args)
    config = build_config(values)
    out = _out_dir(args, values, "grow_out")
    traj = integrate_growth(config)
    ms = extract_milestones(traj)
    paths = [write_columns(os.path.join(out, "trajectory.csv"), traj.CSV_COLUMNS,
                           _trajectory_rows(traj))]
    if BathMode(config.bath.mode) is BathMode.DEPLETING:
        paths.append(write_columns(os.path.join(out, "bath.csv"),
                                   ("t_s", "bath_N", "bath_E_J", "energy_transferred_J"),
                                   (traj.t, traj.bath_N, traj.bath_E, traj.energy_transferred)))
    paths.append(write_dict_rows(os.path.join(out, "milestones.csv"), [ms.as_row()]))
    if _want_plot(args, values):
        from .plotting import growth_figure
        label = config.species.label or "custom species"
        paths.append(growth_figure(traj, os.path.join(out, "growth.svg"), title=label,
                                   milestones=ms))
    write_manifest(os.path.join(out, "manifest.txt"), "grow", config, config.seed, paths,
                   extra={"nfev": traj.metadata["nfev"],
                          "accepted_steps": traj.metadata["accepted_steps"]})
    _summary(ms)
    return EXIT_OK


def _summary(ms):
    for k, v in ms.as_row().items():
        print(f"{k},{'' if v is None else v}")


def _fresh_seed():
    return int(np.random.SeedSequence().entropy % (1 << 63))


def cmd_ssa(args):
    values = resolve_sections(args)
    config = build_config(values)
    if BathMode(config.bath.mode) is not BathMode.STATIC:
        raise UsageError("ssa supports the static bath only")
    seed = config.seed if config.seed is not None else _fresh_seed()
    config = replace(config, seed=seed)
    out = _out_dir(args, values, "ssa_out")
    M = args.trajectories
    grid = np.linspace(0.0, config.t_end, config.solver.n_samples)
    paths = []
    plot = _want_plot(args, values)
    if M == 1:
        tr = ssa_trajectory(config, seed, grid=grid, threshold=args.threshold, log_events=True)
        paths.append(write_columns(os.path.join(out, "events.csv"), ("t_s", "N", "direction"),
                                   (tr.events[:, 0], tr.events[:, 1].astype(np.int64),
                                    tr.events[:, 2].astype(np.int64))))
        paths.append(write_columns(os.path.join(out, "trajectory.csv"), ("t_s", "N"),
                                   (grid, tr.n)))
        extra = {"trajectories": 1, "events": len(tr.events),
                 "first_passage_s": "" if tr.first_passage is None else tr.first_passage}
    elif M >= 2:
        stats = ensemble(config, M, seed, grid=grid, threshold=args.threshold,
                         workers=args.workers)
        ode = integrate_growth(config, t_eval=grid)
        cols = [grid, stats.mean, stats.std, ode.n, stats.minimum, stats.maximum]
        header = ["t_s", "mean", "std", "n_ode", "min", "max"]
        for q in QUANTILES:
            cols.append(stats.quantiles[q])
            header.append(f"q{int(round(q * 100)):02d}")
        paths.append(write_columns(os.path.join(out, "ensemble.csv"), header, cols))
        fp = stats.first_passage[np.isfinite(stats.first_passage)]
        if fp.size:
            edges = np.histogram_bin_edges(fp, bins="auto")
            counts, edges = np.histogram(fp, bins=edges)
        else:
            edges, counts = np.array([0.0, config.t_end]), np.array([0])
        paths.append(write_columns(os.path.join(out, "latency.csv"),
                                   ("bin_lo_s", "bin_hi_s", "count"),
                                   (edges[:-1], edges[1:], counts)))
        if plot:
            from .plotting import ensemble_figure, latency_histogram_figure
            paths.append(ensemble_figure(stats, os.path.join(out, "ensemble.svg"),
                                         ode_t=grid, ode_n=ode.n))
            paths.append(latency_histogram_figure(edges, counts,
                                                  os.path.join(out, "latency.svg"),
                                                  args.threshold))
        extra = {"trajectories": M, "threshold": args.threshold,
                 "not_reached": int(M - fp.size),
                 "latency_mean_s": float(fp.mean()) if fp.size else "",
                 "latency_std_s": float(fp.std(ddof=1)) if fp.size > 1 else ""}
    else:
        raise UsageError("--trajectories must be >= 1")
    write_manifest(os.path.join(out, "manifest.txt"), "ssa", config, seed, paths, extra=extra)
    print(f"seed,{seed}")
    for k, v in extra.items():
        print(f"{k},{v}")
    return EXIT_OK


def cmd_validate(args):
    setup = ValidationSetup(samples=int(float(args.samples)), seed=int(args.seed))
    try:
        checks = run_suites(args.suite, setup)
    except KeyError as e:
        raise UsageError(e.args[0]) from None
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(HEADER)
    for c in checks:
        w.writerow(["" if v is None else v for v in c.row()])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = write_csv(os.path.join(args.out, "validation.csv"), HEADER,
                         [c.row() for c in checks])
        write_manifest(os.path.join(args.out, "manifest.txt"), "validate", None, setup.seed,
                       [path], extra={"suites": " ".join(args.suite),
                                      "samples": setup.samples})
    failed = sum(not c.passed for c in checks)
    print(f"# {len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def parse_grid(specs):
    """``key=v1,v2,...`` or ``key=lo:hi:n`` (inclusive linspace) -> ordered axes."""
    axes = []
    for spec in specs:
        if "=" not in spec:
            raise UsageError(f"bad --grid entry {spec!r}; expected key=values")
        key, vals = spec.split("=", 1)
        if key not in SWEEP_KEYS:
            raise UsageError(f"unknown sweep key {key!r}; choose from {', '.join(SWEEP_KEYS)}")
        try:
            if ":" in vals:
                lo, hi, num = vals.split(":")
                pts = [float(x) for x in np.linspace(float(lo), float(hi), int(num))]
            else:
                pts = [float(x) for x in vals.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"bad values in --grid {spec!r}") from None
        if not pts:
            raise UsageError(f"empty axis in --grid {spec!r}")
        axes.append((key, pts))
    return axes


def _apply_point(values, point):
    v = copy.deepcopy(values)
    for key, x in point:
        sec, k = SWEEP_KEYS[key]
        if sec == "trap":
            v["trap"] = {f"omega_{a}_hz": repr(x) for a in "xyz"}
        else:
            _set(v, sec, k, repr(x))
    return v


def _sweep_point(values):
    """Worker: milestones for one resolved grid point (or the error text)."""
    try:
        config = build_config(values)
        ms = extract_milestones(integrate_growth(config))
        return ms.as_row(), ""
    except (ConfigError, NoCondensateError, StepSizeUnderflow, BathFitError, ValueError,
            RuntimeError) as e:
        return None, str(e).replace("\n", "; ")


def cmd_sweep(args):
    values = resolve_sections(args)
    axes = parse_grid(args.grid)
    count = int(np.prod([len(p) for _, p in axes]))
    if count > args.max_points:
        raise UsageError(f"grid has {count} points, above --max-points {args.max_points}")
    build_config(values)  # fail early on an invalid base scenario
    out = _out_dir(args, values, "sweep_out")
    names = [k for k, _ in axes]
    points = [list(zip(names, combo)) for combo in itertools.product(*(p for _, p in axes))]
    jobs = [_apply_point(values, pt) for pt in points]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    keys = MILESTONE_KEYS
    rows = []
    for pt, (row, err) in zip(points, results):
        rows.append([x for _, x in pt] + ([row[k] for k in keys] if row else [None] * len(keys))
                    + [err])
    paths = [write_csv(os.path.join(out, "sweep.csv"), names + keys + ["error"], rows)]
    if _want_plot(args, values) and len(names) == 1:
        from .plotting import sweep_figure
        xs = [r[0] for r in rows if r[1 + keys.index("latency_time_s")] is not None]
        ys = [r[1 + keys.index("latency_time_s")] for r in rows
              if r[1 + keys.index("latency_time_s")] is not None]
        if xs:
            paths.append(sweep_figure(xs, ys, os.path.join(out, "sweep.svg"), names[0]))
    base = build_config(values)
    write_manifest(os.path.join(out, "manifest.txt"), "sweep", base, base.seed, paths,
                   extra={"grid": " ".join(args.grid), "points": count})
    failed = sum(1 for _, e in results if e)
    print(f"points,{count}")
    print(f"failed_points,{failed}")
    return EXIT_RUNTIME if failed == count else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="becgrowth",
                                description="Condensate growth kinetics from a thermal bath.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grow", help="deterministic growth curve")
    _scenario_args(g)
    g.set_defaults(func=cmd_grow)

    s = sub.add_parser("ssa", help="stochastic birth-death simulation")
    _scenario_args(s)
    s.add_argument("--trajectories", "-M", type=int, default=1)
    s.add_argument("--threshold", type=int, default=100,
                   help="first-passage level for latency statistics")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_ssa)

    v = sub.add_parser("validate", help="run validation suites")
    v.add_argument("--suite", nargs="+", default=["all"],
                   help="bessel cut-fractions detailed-balance collision-mc gpe retherm all")
    v.add_argument("--samples", default="1e6", help="Monte Carlo samples per point")
    v.add_argument("--seed", default=12345, type=int)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_validate)

    w = sub.add_parser("sweep", help="milestones over a parameter grid")
    _scenario_args(w)
    w.add_argument("--grid", nargs="+", required=True,
                   help=f"key=v1,v2 or key=lo:hi:n; keys: {', '.join(SWEEP_KEYS)}")
    w.add_argument("--max-points", type=int, default=1000)
    w.add_argument("--workers", type=int, default=1)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print("invalid configuration:", file=sys.stderr)
        for v in e.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (NoCondensateError, GpeConvergenceError, StepSizeUnderflow, BathFitError,
            TailMassError, RuntimeError, ValueError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
