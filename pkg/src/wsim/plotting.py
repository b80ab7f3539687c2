"""Matplotlib rendering of reproduced figures and single-run reports.

Rendering always goes to files (Agg backend); the CSV output stays the
primary artifact and every plot is derivable from it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

_STYLES = ("k-", "r--", "g:", "b-.", "m-", "c--")

_TIME_LABEL = {
    "dimensionless": r"time  [$1/\Gamma_{\rm coll}$]",
    "physical": r"time  [$\mu$s]",
}


def _new_axes(xlabel, ylabel, title=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=200)
    plt.close(fig)
    return path


def plot_trajectories(curves: dict, path, title=None) -> Path:
    """Overlay fidelity traces of several trajectories."""
    unit_mode = next(iter(curves.values())).source.cfg.unit_mode
    fig, ax = _new_axes(_TIME_LABEL[unit_mode], "fidelity", title)
    for style, (name, traj) in zip(_STYLES, sorted(curves.items())):
        ax.plot(traj.times, traj.fidelity, style, lw=1.4, label=name)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_peak_sweep(points, path, title=None, time_label="peak time") -> Path:
    """Peak fidelity and peak time versus drive ratio, stacked panels."""
    ratios = [r for r, _ in points]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 5.6), sharex=True)
    ax1.semilogx(ratios, [p.f_max for _, p in points], "ko-", ms=4)
    ax1.set_ylabel(r"$F_{\max}$")
    ax1.grid(True, alpha=0.3)
    if title:
        ax1.set_title(title)
    ax2.loglog(ratios, [p.t_max for _, p in points], "rs-", ms=4)
    ax2.set_xlabel("drive ratio")
    ax2.set_ylabel(time_label)
    ax2.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_optimum_series(curves: dict, path, xlabel, title=None) -> Path:
    """Optimized fidelity versus a swept parameter, one line per series."""
    fig, ax = _new_axes(xlabel, r"$F^{\rm (opt)}$", title)
    for style, (name, rows) in zip(_STYLES, sorted(curves.items())):
        xs = [row[0] for row in rows]
        ys = [row[1] for row in rows]
        marker = style[0] + {"-": "o", ":": "^", "-.": "d"}.get(style[1:], "s")
        ax.plot(xs, ys, style, lw=1.2)
        ax.plot(xs, ys, marker, ms=4, label=name)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def render_figure(figure_id: str, curves: dict, path) -> Path:
    """Render one reproduced figure from the curves its runner produced."""
    if figure_id in ("fig2", "fig3a", "fig3c", "fig3d", "fig4c", "fig4d"):
        return plot_trajectories(curves, path, title=figure_id)
    if figure_id in ("fig3b", "fig4ab"):
        (points,) = curves.values()
        label = "peak time" if figure_id == "fig3b" else r"peak time [$\mu$s]"
        return plot_peak_sweep(points, path, title=figure_id, time_label=label)
    if figure_id == "fig5a":
        return plot_optimum_series(curves, path, r"$\tau/2\pi$ [MHz]", title=figure_id)
    if figure_id == "fig5b":
        return plot_optimum_series(curves, path, r"deviation $\delta$", title=figure_id)
    raise ValueError(f"no renderer for {figure_id!r}")
