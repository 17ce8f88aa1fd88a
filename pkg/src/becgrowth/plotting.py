"""Figure rendering for report outputs (SVG by default, any matplotlib format works)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 6.4

params = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.4,
    "axes.spines.right": False,
    "axes.spines.top": False,
    # stable SVG element ids and no creation date, so reruns diff cleanly
    "svg.hashsalt": "becgrowth",
}

_NO_DATE = {"svg": {"Date": None}, "pdf": {"CreationDate": None}, "png": {}}


def _save(fig, path):
    ext = str(path).rsplit(".", 1)[-1].lower()
    fig.savefig(path, metadata=_NO_DATE.get(ext), bbox_inches="tight")
    plt.close(fig)
    return path


def growth_figure(traj, path, title=None, milestones=None):
    """n(t) on linear and logarithmic axes, side by side."""
    with plt.rc_context(params):
        fig, (ax_lin, ax_log) = plt.subplots(1, 2, figsize=(fig_width, fig_width * golden_mean / 1.3))
        ax_lin.plot(traj.t, traj.n, color="#08589e")
        ax_lin.set_xlabel("t (s)")
        ax_lin.set_ylabel("condensate number n")
        pos = traj.n > 0
        ax_log.semilogy(traj.t[pos], traj.n[pos], color="#08589e")
        ax_log.set_xlabel("t (s)")
        if milestones is not None and milestones.latency_time is not None:
            for ax in (ax_lin, ax_log):
                ax.axvline(milestones.latency_time, color="0.6", ls="--", lw=0.8)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        return _save(fig, path)


def ensemble_figure(stats, path, ode_t=None, ode_n=None, title=None):
    with plt.rc_context(params):
        fig, ax = plt.subplots(figsize=(fig_width * 0.7, fig_width * 0.7 * golden_mean))
        q = stats.quantiles
        ax.fill_between(stats.grid, q[0.05], q[0.95], color="#a8ddb5", alpha=0.6, lw=0,
                        label="5-95 %")
        ax.fill_between(stats.grid, q[0.25], q[0.75], color="#4eb3d3", alpha=0.6, lw=0,
                        label="25-75 %")
        ax.plot(stats.grid, stats.mean, color="#08589e", label=f"mean (M={stats.M})")
        if ode_n is not None:
            ax.plot(ode_t, ode_n, color="k", ls="--", lw=1.0, label="rate equation")
        ax.set_xlabel("t (s)")
        ax.set_ylabel("N")
        ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def latency_histogram_figure(edges, counts, path, threshold):
    with plt.rc_context(params):
        fig, ax = plt.subplots(figsize=(fig_width * 0.6, fig_width * 0.6 * golden_mean))
        ax.stairs(counts, edges, fill=True, color="#7bccc4")
        ax.set_xlabel(f"first-passage time to N = {threshold} (s)")
        ax.set_ylabel("count")
        fig.tight_layout()
        return _save(fig, path)


def sweep_figure(xs, ys, path, xlabel, ylabel="latency time (s)"):
    with plt.rc_context(params):
        fig, ax = plt.subplots(figsize=(fig_width * 0.6, fig_width * 0.6 * golden_mean))
        ax.plot(xs, ys, "o-", color="#2b8cbe")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        fig.tight_layout()
        return _save(fig, path)


def gpe_figure(state, path):
    with plt.rc_context(params):
        fig, ax = plt.subplots(figsize=(fig_width * 0.6, fig_width * 0.6 * golden_mean))
        ax.plot(state.r * 1e6, state.atom_count * state.xi ** 2, color="#08589e", label="GPE")
        ax.set_xlabel(r"r ($\mu$m)")
        ax.set_ylabel(r"density (m$^{-3}$)")
        fig.tight_layout()
        return _save(fig, path)
