"""Figure rendering for the report paths.

Figures are drawn straight onto ``matplotlib.figure.Figure`` objects (no
pyplot, no global state) and written as PNG next to the delimited data
they visualize, so a run directory is self-contained.
"""

from __future__ import annotations

from typing import Optional

import numpy as np


def _new_axes(nrows: int = 1):
    from matplotlib.figure import Figure

    fig = Figure(figsize=(7.0, 2.8 * nrows), dpi=120)
    axes = fig.subplots(nrows, 1, sharex=True)
    return fig, (axes if nrows > 1 else [axes])


def save_trajectory_figure(traj, path, t_mark: Optional[float] = None) -> None:
    """x1 and s versus time for a single run; ``t_mark`` flags the deadline."""
    fig, (ax1, ax2) = _new_axes(2)
    ax1.plot(traj.t, traj.x1, lw=1.0, color="tab:blue")
    ax1.set_ylabel("x1")
    ax2.plot(traj.t, traj.s, lw=1.0, color="tab:orange")
    ax2.set_ylabel("s")
    ax2.set_xlabel("time [s]")
    for ax in (ax1, ax2):
        ax.axhline(0.0, color="k", lw=0.5)
        if t_mark is not None:
            ax.axvline(t_mark, color="tab:red", lw=0.8, ls="--")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)


def save_overlay_figure(t, series, path, ylabel: str, t_mark: Optional[float] = None) -> None:
    """All scenario traces of one signal overlaid; ``series`` is (n, m)."""
    fig, (ax,) = _new_axes(1)
    series = np.asarray(series)
    alpha = max(0.04, min(0.5, 30.0 / max(1, series.shape[0])))
    for row in series:
        ax.plot(t, row, lw=0.6, color="tab:blue", alpha=alpha)
    if t_mark is not None:
        ax.axvline(t_mark, color="tab:red", lw=0.8, ls="--")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
