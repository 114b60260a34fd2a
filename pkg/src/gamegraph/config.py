"""Game specification documents: strict YAML schema in, built objects out.

A document declares one game under a top-level ``kind``:

``quadratic``
    dims: [n_1, ..., n_N]
    P: map of "i" (own block) and "i,j" (coupling block) to row-major
    matrices, players numbered from 1; omitted blocks are zero
    r: map of "i" to vectors (optional, zero default)

``lq``
    A, B (list per player), Q (list), R (list), T (horizon), z0,
    targets (optional list per player)

``bilinear``
    A, B, gamma1, gamma2, mode (simultaneous | alternating)

Shared keys: ``gamma`` (list of per-player step sizes, or "uniform" to apply
the spectral step-size rule; not used by bilinear documents), ``tolerance``
and ``seed``.  Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import IO

import numpy as np
import yaml

from .bilinear import BilinearGameSpec, build_bilinear_graph
from .core import (
    GameGraph,
    QuadraticGame,
    StepSizes,
    build_game_graph,
    game_from_graph,
    game_jacobian,
    uniform_step_size,
)
from .errors import ConfigError
from .lq import LiftedLQGame, LQGameSpec, lift

__all__ = ["GameDocument", "load_document", "parse_document", "quadratic_document"]

DEFAULT_TOLERANCE = 1e-9
DEFAULT_SEED = 0

_SHARED_KEYS = {"kind", "tolerance", "seed"}
_KEYS = {
    "quadratic": _SHARED_KEYS | {"dims", "P", "r", "gamma"},
    "lq": _SHARED_KEYS | {"A", "B", "Q", "R", "T", "z0", "targets", "gamma"},
    "bilinear": _SHARED_KEYS | {"A", "B", "gamma1", "gamma2", "mode"},
}


@dataclass
class GameDocument:
    """A parsed document with its derived game and graph ready for analysis."""

    kind: str
    game: QuadraticGame
    graph: GameGraph
    gamma: StepSizes
    tolerance: float
    seed: int
    lifted: LiftedLQGame | None = None
    bilinear: BilinearGameSpec | None = None


def load_document(source: str | IO[str]) -> GameDocument:
    """Read and parse a document from a path, '-' (stdin), or a stream."""
    if hasattr(source, "read"):
        text = source.read()
        name = getattr(source, "name", "<stream>")
    elif source == "-":
        text = sys.stdin.read()
        name = "<stdin>"
    else:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
        name = str(source)
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as err:
        mark = err.problem_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{name}: invalid YAML{where}: {err.problem}") from None
    except yaml.YAMLError as err:
        raise ConfigError(f"{name}: invalid YAML: {err}") from None
    return parse_document(raw, name=name)


def _require_mapping(raw, name):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: document must be a mapping, got {type(raw).__name__}")
    return raw


def _matrix(value, name: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(f"{name} must be a non-empty list of rows")
    width = len(value[0])
    for idx, row in enumerate(value):
        if len(row) != width:
            raise ConfigError(
                f"{name} is ragged: row {idx + 1} has {len(row)} entries, expected {width}"
            )
    try:
        return np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} has non-numeric entries") from None


def _vector(value, name: str) -> np.ndarray:
    if not isinstance(value, list):
        raise ConfigError(f"{name} must be a list of numbers")
    try:
        return np.array(value, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} has non-numeric entries") from None


def _player_index(token, n_players: int, name: str) -> int:
    try:
        idx = int(token)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: player index {token!r} is not an integer") from None
    if not 1 <= idx <= n_players:
        raise ConfigError(f"{name}: player {idx} out of range 1..{n_players}")
    return idx - 1


def _check_keys(raw: dict, kind: str, name: str) -> None:
    unknown = set(map(str, raw)) - _KEYS[kind]
    if unknown:
        raise ConfigError(
            f"{name}: unknown key(s) for kind '{kind}': {', '.join(sorted(unknown))}"
        )


def _shared(raw: dict, name: str) -> tuple[float, int]:
    tolerance = raw.get("tolerance", DEFAULT_TOLERANCE)
    if not isinstance(tolerance, (int, float)) or tolerance < 0:
        raise ConfigError(f"{name}: tolerance must be a nonnegative number")
    seed = raw.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int):
        raise ConfigError(f"{name}: seed must be an integer")
    return float(tolerance), seed


def _resolve_gamma(raw_gamma, game: QuadraticGame, name: str) -> StepSizes:
    if raw_gamma is None or raw_gamma == "uniform":
        rule = uniform_step_size(game_jacobian(game))
        return StepSizes.uniform(rule.gamma, game.n_players)
    if isinstance(raw_gamma, list):
        if len(raw_gamma) != game.n_players:
            raise ConfigError(
                f"{name}: gamma must list {game.n_players} step sizes, got {len(raw_gamma)}"
            )
        try:
            return StepSizes(raw_gamma)
        except ValueError as err:
            raise ConfigError(f"{name}: {err}") from None
    raise ConfigError(f"{name}: gamma must be a list of step sizes or 'uniform'")


def _parse_quadratic(raw: dict, name: str) -> tuple[QuadraticGame, StepSizes]:
    if "dims" not in raw:
        raise ConfigError(f"{name}: quadratic documents require 'dims'")
    dims_raw = raw["dims"]
    if not isinstance(dims_raw, list) or not all(isinstance(d, int) for d in dims_raw):
        raise ConfigError(f"{name}: dims must be a list of integers")
    N = len(dims_raw)
    P_map = raw.get("P", {})
    if not isinstance(P_map, dict):
        raise ConfigError(f"{name}: P must be a mapping of block labels to matrices")
    own = [np.zeros((d, d)) for d in dims_raw]
    cross = {}
    for key, value in P_map.items():
        tokens = [t.strip() for t in str(key).split(",")]
        if len(tokens) == 1:
            i = _player_index(tokens[0], N, f"{name}: P[{key}]")
            own[i] = _matrix(value, f"{name}: P[{key}]")
        elif len(tokens) == 2:
            i = _player_index(tokens[0], N, f"{name}: P[{key}]")
            j = _player_index(tokens[1], N, f"{name}: P[{key}]")
            if i == j:
                raise ConfigError(f"{name}: P[{key}] names a pair with i == j")
            cross[(i, j)] = _matrix(value, f"{name}: P[{key}]")
        else:
            raise ConfigError(f"{name}: P key {key!r} must be 'i' or 'i,j'")
    r_map = raw.get("r", {})
    if not isinstance(r_map, dict):
        raise ConfigError(f"{name}: r must be a mapping of player labels to vectors")
    r = [np.zeros(d) for d in dims_raw]
    for key, value in r_map.items():
        i = _player_index(key, N, f"{name}: r[{key}]")
        r[i] = _vector(value, f"{name}: r[{key}]")
    try:
        game = QuadraticGame(dims_raw, own, cross, r)
    except ValueError as err:
        raise ConfigError(f"{name}: {err}") from None
    return game, _resolve_gamma(raw.get("gamma"), game, name)


def _parse_lq(raw: dict, name: str):
    for key in ("A", "B", "Q", "R", "T", "z0"):
        if key not in raw:
            raise ConfigError(f"{name}: lq documents require '{key}'")
    A = _matrix(raw["A"], f"{name}: A")
    for key in ("B", "Q", "R"):
        if not isinstance(raw[key], list):
            raise ConfigError(f"{name}: {key} must be a list with one matrix per player")
    B = [_matrix(b, f"{name}: B[{i + 1}]") for i, b in enumerate(raw["B"])]
    Q = [_matrix(q, f"{name}: Q[{i + 1}]") for i, q in enumerate(raw["Q"])]
    R = [_matrix(r_, f"{name}: R[{i + 1}]") for i, r_ in enumerate(raw["R"])]
    if not isinstance(raw["T"], int):
        raise ConfigError(f"{name}: T must be an integer")
    z0 = _vector(raw["z0"], f"{name}: z0")
    targets = None
    if "targets" in raw:
        if not isinstance(raw["targets"], list):
            raise ConfigError(f"{name}: targets must be a list with one vector per player")
        targets = [_vector(c, f"{name}: targets[{i + 1}]") for i, c in enumerate(raw["targets"])]
    try:
        spec = LQGameSpec(A, B, Q, R, raw["T"], z0, targets)
    except ValueError as err:
        raise ConfigError(f"{name}: {err}") from None
    lifted = lift(spec)
    gamma = _resolve_gamma(raw.get("gamma"), lifted.game, name)
    return lifted, gamma


def _parse_bilinear(raw: dict, name: str) -> BilinearGameSpec:
    for key in ("A", "B", "gamma1", "gamma2", "mode"):
        if key not in raw:
            raise ConfigError(f"{name}: bilinear documents require '{key}'")
    if not isinstance(raw["gamma1"], (int, float)) or not isinstance(raw["gamma2"], (int, float)):
        raise ConfigError(f"{name}: gamma1 and gamma2 must be numbers")
    try:
        return BilinearGameSpec(
            _matrix(raw["A"], f"{name}: A"),
            _matrix(raw["B"], f"{name}: B"),
            raw["gamma1"],
            raw["gamma2"],
            raw["mode"],
        )
    except ValueError as err:
        raise ConfigError(f"{name}: {err}") from None


def parse_document(raw, name: str = "<document>") -> GameDocument:
    """Validate a decoded document and build its game, graph, and step sizes."""
    raw = _require_mapping(raw, name)
    kind = raw.get("kind")
    if kind not in _KEYS:
        raise ConfigError(
            f"{name}: kind must be one of {sorted(_KEYS)}, got {kind!r}"
        )
    _check_keys(raw, kind, name)
    tolerance, seed = _shared(raw, name)
    lifted = None
    bilinear = None
    if kind == "quadratic":
        game, gamma = _parse_quadratic(raw, name)
        graph = build_game_graph(game, gamma)
    elif kind == "lq":
        lifted, gamma = _parse_lq(raw, name)
        game = lifted.game
        graph = build_game_graph(game, gamma)
    else:
        bilinear = _parse_bilinear(raw, name)
        graph = build_bilinear_graph(bilinear)
        game = game_from_graph(graph)
        graph = GameGraph(
            dims=graph.dims, W=graph.W, gamma=graph.gamma,
            offset=graph.offset, game=game,
        )
        gamma = graph.gamma
    return GameDocument(
        kind=kind,
        game=game,
        graph=graph,
        gamma=gamma,
        tolerance=tolerance,
        seed=seed,
        lifted=lifted,
        bilinear=bilinear,
    )


def quadratic_document(
    game: QuadraticGame,
    gamma: StepSizes,
    tolerance: float | None = None,
    seed: int | None = None,
) -> dict:
    """Canonical quadratic document for a game (player labels from 1)."""
    doc: dict = {"kind": "quadratic", "dims": list(game.dims.dims)}
    doc["gamma"] = [float(g) for g in gamma.values]
    if tolerance is not None:
        doc["tolerance"] = float(tolerance)
    if seed is not None:
        doc["seed"] = int(seed)
    P: dict[str, list] = {}
    for i in range(game.n_players):
        if np.any(game.P[i]):
            P[str(i + 1)] = game.P[i].tolist()
    for (i, j), block in sorted(game.cross.items()):
        if np.any(block):
            P[f"{i + 1},{j + 1}"] = block.tolist()
    doc["P"] = P
    r = {
        str(i + 1): game.r[i].tolist()
        for i in range(game.n_players)
        if np.any(game.r[i])
    }
    if r:
        doc["r"] = r
    return doc
