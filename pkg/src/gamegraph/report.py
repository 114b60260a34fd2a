"""Serialization of analysis and simulation results.

Delimited outputs use 17 significant digits so every double round-trips
exactly; JSON relies on Python's shortest-repr floats for the same reason.
Player numbers in all emitted files start at 1, matching the document
schema and the CLI.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .decoupling import DecouplingReport
from .simulate import DeviationReport, Trajectory

__all__ = [
    "format_float",
    "decoupling_report_payload",
    "deviation_report_payload",
    "write_json",
    "write_trajectory_csv",
    "write_costs_csv",
    "write_sweep_csv",
]


def format_float(value: float) -> str:
    return f"{value:.17g}"


def decoupling_report_payload(report: DecouplingReport, runtime_ms: float) -> dict:
    """JSON-ready mirror of one decoupling report (1-based pair)."""
    return {
        "pair": [report.query.source + 1, report.query.target + 1],
        "verdict": bool(report.verdict),
        "residuals": [float(r) for r in report.residuals],
        "normalizers": [float(m) for m in report.normalizers],
        "tolerance": float(report.query.tolerance),
        "method": report.method,
        "exact": bool(report.exact),
        "firstFailure": report.first_failure,
        "runtimeMs": runtime_ms,
    }


def deviation_report_payload(report: DeviationReport, partial: bool = False) -> dict:
    payload = {
        "source": None if report.source is None else report.source + 1,
        "bound": report.bound,
        "steps": report.steps,
        "divergedAt": report.diverged_at,
        "partial": bool(partial or report.diverged_at is not None),
        "players": [
            {
                "player": j + 1,
                "maxDeviation": float(report.max_deviation[j]),
                "relDeviation": float(report.rel_deviation[j]),
            }
            for j in range(len(report.max_deviation))
        ],
    }
    return payload


def write_json(payload: dict, path: Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def write_trajectory_csv(trajectory: Trajectory, path: Path) -> Path:
    """Long-format iterate table: k,player,coord,value."""
    path = Path(path)
    dims = trajectory.dims
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "player", "coord", "value"])
        for k, joint in enumerate(trajectory.iterates):
            for i in range(dims.n_players):
                block = joint[dims.block(i)]
                for c, value in enumerate(block):
                    writer.writerow([k, i + 1, c + 1, format_float(value)])
    return path


def write_costs_csv(clean_costs, corrupted_costs, path: Path) -> Path:
    """Per-player cost series of both runs: k,player,run,cost."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "player", "run", "cost"])
        n_players, n_steps = clean_costs.shape
        for j in range(n_players):
            for k in range(n_steps):
                writer.writerow([k, j + 1, "clean", format_float(clean_costs[j, k])])
                writer.writerow([k, j + 1, "disturbed", format_float(corrupted_costs[j, k])])
    return path


def write_sweep_csv(reports: list[DeviationReport], path: Path) -> Path:
    """Deviation-vs-bound table: bound,player,maxDeviation,relDeviation."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bound", "player", "maxDeviation", "relDeviation"])
        for report in reports:
            for j in range(len(report.max_deviation)):
                writer.writerow(
                    [
                        format_float(report.bound if report.bound is not None else 0.0),
                        j + 1,
                        format_float(report.max_deviation[j]),
                        format_float(report.rel_deviation[j]),
                    ]
                )
    return path
