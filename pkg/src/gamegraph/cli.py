"""Command-line front end.

Subcommands operate on a game document (see :mod:`gamegraph.config`) given
as a path or ``-`` for stdin:

* ``analyze``  -- decoupling verdicts for one ordered pair or all pairs.
* ``simulate`` -- clean/disturbed trajectories, deviation reports, sweeps;
  writes CSV/JSON data plus rendered figures into an output directory.
* ``build``    -- dump the game graph, or the derived quadratic game as a
  document that can be re-ingested.
* ``nash``     -- print the Nash equilibrium joint action.
* ``stepsize`` -- print the spectral uniform step size.

Player numbers on the command line and in all emitted files are 1-based.
Exit codes: 0 success (``analyze``: all queried pairs decoupled), 1 some
queried pair not decoupled, 2 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from .config import GameDocument, load_document, quadratic_document
from .core import game_jacobian, nash_equilibrium, uniform_step_size
from .decoupling import DecouplingQuery, all_pairs_report, check_algebraic, check_paths
from .errors import ConfigError, DivergenceError, GameGraphError
from .report import (
    decoupling_report_payload,
    deviation_report_payload,
    format_float,
    write_costs_csv,
    write_json,
    write_sweep_csv,
    write_trajectory_csv,
)
from .simulate import DisturbanceSignal, _row_norms, compare, magnitude_sweep, run

__all__ = ["main"]


def _parse_player(value: int, n_players: int, what: str) -> int:
    if not 1 <= value <= n_players:
        raise ConfigError(f"{what} {value} out of range 1..{n_players}")
    return value - 1


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _cmd_analyze(args) -> int:
    doc = load_document(args.input)
    graph = doc.graph
    N = graph.n_players
    tolerance = args.tolerance if args.tolerance is not None else doc.tolerance
    if args.exact and args.method == "paths":
        raise ConfigError("--exact applies to the algebraic method only")
    if args.pair is not None:
        i = _parse_player(args.pair[0], N, "--pair source")
        j = _parse_player(args.pair[1], N, "--pair target")
        pairs = [(i, j)]
    else:
        pairs = [(i, j) for i in range(N) for j in range(N) if i != j]

    payloads = []
    if args.all_pairs and args.method == "algebraic" and not args.exact:
        start = time.perf_counter()
        reports = all_pairs_report(graph, tolerance)
        elapsed = (time.perf_counter() - start) * 1000.0 / max(1, len(reports))
        for report in reports:
            payloads.append(decoupling_report_payload(report, runtime_ms=elapsed))
    else:
        for i, j in pairs:
            query = DecouplingQuery(i, j, tolerance)
            start = time.perf_counter()
            if args.method == "paths":
                report = check_paths(graph, query)
            else:
                report = check_algebraic(graph, query, exact=args.exact)
            elapsed = (time.perf_counter() - start) * 1000.0
            payloads.append(decoupling_report_payload(report, runtime_ms=elapsed))

    for payload in payloads:
        state = "decoupled" if payload["verdict"] else "NOT decoupled"
        extra = ""
        if payload["firstFailure"] is not None:
            extra = f" (first failure at k={payload['firstFailure']})"
        print(
            f"pair {payload['pair'][0]}->{payload['pair'][1]}: {state}{extra}",
            file=sys.stderr,
        )
    document = {
        "kind": "decoupling-analysis",
        "method": args.method,
        "tolerance": tolerance,
        "reports": payloads,
    }
    if doc.bilinear is not None:
        n1 = doc.bilinear.n1
        document["coordinateNodes"] = {
            "side1": [1, n1],
            "side2": [n1 + 1, n1 + doc.bilinear.n2],
        }
    _emit(json.dumps(document, indent=2) + "\n", args.out)
    return 0 if all(p["verdict"] for p in payloads) else 1


def _cost_series(doc: GameDocument, report, clean, disturbed):
    """Per-player cost arrays of both runs over the compared prefix.

    Dynamic-game documents report the raw rolled-out cost: the one-shot form
    hides cost movement that is constant in the player's own action.
    """
    K = report.steps
    if doc.lifted is not None:
        from .lq import trajectory_costs

        spec = doc.lifted.spec
        clean_costs = np.array(
            [trajectory_costs(spec, clean.iterates[: K + 1], j) for j in range(doc.game.n_players)]
        )
        disturbed_costs = np.array(
            [
                trajectory_costs(spec, disturbed.iterates[: K + 1], j)
                for j in range(doc.game.n_players)
            ]
        )
        return clean_costs, disturbed_costs
    if report.clean_costs is not None:
        return report.clean_costs, report.corrupted_costs
    return None


def _parse_bounds(text: str) -> list[float]:
    try:
        bounds = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"--sweep expects comma-separated numbers, got {text!r}") from None
    if not bounds:
        raise ConfigError("--sweep lists no bounds")
    return bounds


def _cmd_simulate(args) -> int:
    doc = load_document(args.input)
    graph = doc.graph
    if args.steps < 0:
        raise ConfigError("--steps must be >= 0")
    seed = args.seed if args.seed is not None else doc.seed
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    x0 = np.zeros(graph.n)
    written: list[str] = []
    summary: dict = {"input": str(args.input), "steps": args.steps, "seed": seed}

    from . import plots  # imported lazily; pulls in matplotlib

    if args.sweep is not None:
        if args.disturb is None:
            raise ConfigError("--sweep requires --disturb to name the corrupted player")
        player = _parse_player(args.disturb, graph.n_players, "--disturb player")
        bounds = _parse_bounds(args.sweep)
        reports = magnitude_sweep(graph, x0, args.steps, player, bounds, seed)
        written.append(str(write_sweep_csv(reports, outdir / "sweep.csv")))
        written.append(str(plots.render_sweep_figure(reports, outdir / "sweep.png")))
        payload = {
            "kind": "deviation-sweep",
            "reports": [deviation_report_payload(r) for r in reports],
        }
        written.append(str(write_json(payload, outdir / "deviations.json")))
        summary["partial"] = any(r.diverged_at is not None for r in reports)
        for report in reports:
            worst = int(np.argmax(report.rel_deviation))
            print(
                f"bound {report.bound:g}: worst relative deviation "
                f"{report.rel_deviation[worst]:.3e} (player {worst + 1})"
            )
    elif args.disturb is not None:
        player = _parse_player(args.disturb, graph.n_players, "--disturb player")
        bound = args.bound if args.bound is not None else 1.0
        signal = DisturbanceSignal.seeded_uniform(player, seed, bound)
        report = compare(graph, x0, args.steps, signal)
        clean = run(graph, x0, args.steps)
        try:
            disturbed = run(graph, x0, args.steps, signal)
        except DivergenceError as err:
            disturbed = err.trajectory
        written.append(str(write_trajectory_csv(clean, outdir / "trajectory.csv")))
        written.append(
            str(write_trajectory_csv(disturbed, outdir / "trajectory_disturbed.csv"))
        )
        written.append(
            str(write_json(deviation_report_payload(report), outdir / "deviations.json"))
        )
        written.append(
            str(plots.render_deviation_figure(report, outdir / "deviations.png"))
        )
        costs = _cost_series(doc, report, clean, disturbed)
        if costs is not None:
            clean_costs, disturbed_costs = costs
            written.append(
                str(write_costs_csv(clean_costs, disturbed_costs, outdir / "costs.csv"))
            )
            written.append(
                str(plots.render_cost_figure(clean_costs, disturbed_costs, outdir / "costs.png"))
            )
        summary["partial"] = report.diverged_at is not None
        if report.diverged_at is not None:
            print(
                f"disturbed run diverged at iteration {report.diverged_at}; "
                f"deviations cover the first {report.steps} steps",
                file=sys.stderr,
            )
        for j in range(graph.n_players):
            print(
                f"player {j + 1}: max deviation {report.max_deviation[j]:.6e} "
                f"(relative {report.rel_deviation[j]:.6e})"
            )
    else:
        partial = False
        try:
            trajectory = run(graph, x0, args.steps)
        except DivergenceError as err:
            trajectory = err.trajectory
            partial = True
            print(
                f"run diverged at iteration {err.iteration}; writing the finite prefix",
                file=sys.stderr,
            )
        written.append(str(write_trajectory_csv(trajectory, outdir / "trajectory.csv")))
        written.append(
            str(plots.render_convergence_figure(trajectory, outdir / "convergence.png"))
        )
        summary["partial"] = partial
        final_norm = _row_norms(trajectory.iterates[-1:])[0]
        print(f"ran {trajectory.steps} steps; final action norm {final_norm:.6e}")

    summary["files"] = written
    write_json(summary, outdir / "summary.json")
    print(f"wrote {len(written) + 1} files under {outdir}")
    return 0


def _cmd_build(args) -> int:
    doc = load_document(args.input)
    if args.emit == "game":
        payload = quadratic_document(doc.game, doc.gamma, doc.tolerance, doc.seed)
        _emit(yaml.safe_dump(payload, sort_keys=False), args.out)
    else:
        graph = doc.graph
        payload = {
            "dims": list(graph.dims.dims),
            "gamma": [float(g) for g in graph.gamma.values],
            "W": graph.W.tolist(),
            "offset": graph.offset.tolist(),
        }
        if doc.lifted is not None:
            payload["G"] = [G.tolist() for G in doc.lifted.G]
            payload["H"] = doc.lifted.H.tolist()
        _emit(yaml.safe_dump(payload, sort_keys=False), args.out)
    return 0


def _cmd_nash(args) -> int:
    doc = load_document(args.input)
    x_star = nash_equilibrium(doc.game)
    sys.stdout.write("\n".join(format_float(v) for v in x_star) + "\n")
    return 0


def _cmd_stepsize(args) -> int:
    doc = load_document(args.input)
    rule = uniform_step_size(game_jacobian(doc.game))
    print(
        f"alpha={format_float(rule.alpha)} beta={format_float(rule.beta)}",
        file=sys.stderr,
    )
    sys.stdout.write(format_float(rule.gamma) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamegraph",
        description="Disturbance-decoupling analysis and gradient-play "
        "simulation for quadratic games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="decoupling verdicts for player pairs")
    pa.add_argument("input", help="game document path, or - for stdin")
    which = pa.add_mutually_exclusive_group(required=True)
    which.add_argument("--pair", nargs=2, type=int, metavar=("I", "J"),
                       help="source and target player (1-based)")
    which.add_argument("--all-pairs", action="store_true",
                       help="analyze every ordered pair")
    pa.add_argument("--method", choices=("algebraic", "paths"), default="algebraic")
    pa.add_argument("--tolerance", type=float, help="zero-test tolerance")
    pa.add_argument("--exact", action="store_true",
                    help="rational arithmetic, tolerance-free verdict")
    pa.add_argument("--out", help="write the JSON report here instead of stdout")
    pa.set_defaults(func=_cmd_analyze)

    ps = sub.add_parser("simulate", help="run clean/disturbed learning dynamics")
    ps.add_argument("input", help="game document path, or - for stdin")
    ps.add_argument("--steps", type=int, default=100)
    ps.add_argument("--disturb", type=int, metavar="PLAYER",
                    help="player (1-based) whose gradient is corrupted")
    ps.add_argument("--bound", type=float, help="disturbance magnitude bound")
    ps.add_argument("--seed", type=int, help="override the document seed")
    ps.add_argument("--sweep", metavar="B1,B2,...",
                    help="comma-separated nondecreasing disturbance bounds")
    ps.add_argument("--out", default="gamegraph_out",
                    help="output directory (default: gamegraph_out)")
    ps.set_defaults(func=_cmd_simulate)

    pb = sub.add_parser("build", help="emit the graph or the derived quadratic game")
    pb.add_argument("input", help="game document path, or - for stdin")
    pb.add_argument("--emit", choices=("graph", "game"), default="graph")
    pb.add_argument("--out", help="write here instead of stdout")
    pb.set_defaults(func=_cmd_build)

    pn = sub.add_parser("nash", help="print the Nash equilibrium joint action")
    pn.add_argument("input", help="game document path, or - for stdin")
    pn.set_defaults(func=_cmd_nash)

    pz = sub.add_parser("stepsize", help="print the spectral uniform step size")
    pz.add_argument("input", help="game document path, or - for stdin")
    pz.set_defaults(func=_cmd_stepsize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GameGraphError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
