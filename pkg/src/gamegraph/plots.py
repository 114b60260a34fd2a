"""Matplotlib renderings of simulation results, written next to the data files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .simulate import DeviationReport, Trajectory, _row_norms

__all__ = [
    "render_deviation_figure",
    "render_cost_figure",
    "render_sweep_figure",
    "render_convergence_figure",
]

_EPS = 1e-300


def _log_safe(values) -> np.ndarray:
    """Clip to a range matplotlib's log scale can transform without overflow."""
    return np.clip(values, _EPS, 1e100)


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_deviation_figure(report: DeviationReport, path: Path) -> Path:
    """Per-player ||y_j^k - x_j^k|| over iterations, log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = np.arange(report.deviation_series.shape[1])
    for j, series in enumerate(report.deviation_series):
        ax.semilogy(ks, _log_safe(series), label=f"player {j + 1}")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("action deviation")
    ax.set_title("Deviation of disturbed run from clean run")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def render_cost_figure(clean_costs, corrupted_costs, path: Path) -> Path:
    """Per-player cost series: clean solid, disturbed dashed."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = np.arange(clean_costs.shape[1])
    for j in range(clean_costs.shape[0]):
        line, = ax.plot(ks, clean_costs[j], label=f"player {j + 1} clean")
        ax.plot(ks, corrupted_costs[j], linestyle="--",
                color=line.get_color(), label=f"player {j + 1} disturbed")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("cost")
    ax.set_title("Player costs under clean and disturbed learning")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def render_sweep_figure(reports: list[DeviationReport], path: Path) -> Path:
    """Per-player peak deviation as a function of the disturbance bound."""
    fig, ax = plt.subplots(figsize=(6, 4))
    bounds = [r.bound if r.bound is not None else 0.0 for r in reports]
    n_players = len(reports[0].max_deviation)
    for j in range(n_players):
        devs = _log_safe([float(r.max_deviation[j]) for r in reports])
        ax.plot(bounds, devs, marker="o", label=f"player {j + 1}")
    ax.set_yscale("log")
    ax.set_xlabel("disturbance bound")
    ax.set_ylabel("max action deviation")
    ax.set_title("Deviation vs. disturbance magnitude")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def render_convergence_figure(trajectory: Trajectory, path: Path) -> Path:
    """Per-player distance to the final iterate, a quick convergence view."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = np.arange(trajectory.steps + 1)
    for j in range(trajectory.dims.n_players):
        block = trajectory.per_player(j)
        dist = _row_norms(block - block[-1])
        ax.semilogy(ks, _log_safe(dist), label=f"player {j + 1}")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("distance to final action")
    ax.set_title("Learning trajectory convergence")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)
