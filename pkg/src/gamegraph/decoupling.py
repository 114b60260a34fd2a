"""Disturbance-decoupling tests on game graphs.

A disturbance injected into player ``i``'s gradient leaves player ``j``'s
trajectory untouched, for every disturbance sequence and every start point,
exactly when the (j, i) block of W^k vanishes for all 1 <= k < n (with
n the total action dimension; higher powers follow by Cayley-Hamilton).
Two independent deciders are provided:

* :func:`check_algebraic` reads the blocks off dense matrix powers.
* :func:`check_paths` literally enumerates directed paths from i to j and
  sums their weights, the weight of a path being the product of its edge
  blocks composed target-to-source.

Both return a :class:`DecouplingReport` with per-length residual norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import GameGraph, QuadraticGame, StepSizes, build_game_graph
from .errors import DimensionError, NotPotentialGameError, PathEnumerationCapError

__all__ = [
    "DEFAULT_TOLERANCE",
    "ENUMERATION_CAP",
    "DecouplingQuery",
    "DecouplingReport",
    "PathSet",
    "check_algebraic",
    "check_paths",
    "enumerate_paths",
    "all_pairs_report",
    "check_potential_symmetry",
    "SymmetryRecord",
]

DEFAULT_TOLERANCE = 1e-9

# Budget on total path extensions before check_paths refuses; enumeration is
# exponential by nature and exists as a verification oracle, not as the
# production decision procedure.
ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class DecouplingQuery:
    """Ordered (source, target) player pair with a zero-test tolerance.

    ``source`` is the player whose gradient is corrupted; ``target`` is the
    player whose trajectory must stay clean.  A player is never decoupled
    from its own disturbance, so source == target is rejected outright.
    """

    source: int
    target: int
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.source == self.target:
            raise DimensionError(
                "source and target must differ: a player is never decoupled "
                "from its own disturbance"
            )
        if self.source < 0 or self.target < 0:
            raise DimensionError("player indices must be nonnegative")
        if self.tolerance < 0:
            raise DimensionError("tolerance must be nonnegative")


@dataclass(frozen=True)
class DecouplingReport:
    """Outcome of a decoupling test for one ordered pair.

    ``residuals[k-1]`` is the Frobenius norm of the (target, source) block of
    W^k (or of the path-weight sum of length k); ``normalizers[k-1]`` is
    ||W^k||_F.  The verdict is true iff every residual is at most
    tolerance * max(1, normalizer).
    """

    query: DecouplingQuery
    verdict: bool
    residuals: tuple[float, ...]
    normalizers: tuple[float, ...]
    method: str
    exact: bool = False

    @property
    def first_failure(self) -> int | None:
        """Smallest power k whose residual breaks the zero test, if any."""
        for k, (res, nrm) in enumerate(zip(self.residuals, self.normalizers), start=1):
            if res > self.query.tolerance * max(1.0, nrm):
                return k
        return None


@dataclass(frozen=True)
class PathSet:
    """Explicit directed paths of one length between two players.

    ``paths`` are node sequences (source, v_1, ..., v_{k-1}, target);
    ``weight_sum`` is the sum over paths of the edge-block products
    W[target, v_{k-1}] @ ... @ W[v_1, source].
    """

    source: int
    target: int
    length: int
    paths: tuple[tuple[int, ...], ...]
    weight_sum: np.ndarray


def _check_query(graph: GameGraph, query: DecouplingQuery) -> None:
    N = graph.n_players
    if query.source >= N or query.target >= N:
        raise DimensionError(
            f"query pair ({query.source}, {query.target}) out of range for {N} players"
        )


def _zero_test(residuals: Sequence[float], normalizers: Sequence[float], tol: float) -> bool:
    return all(r <= tol * max(1.0, m) for r, m in zip(residuals, normalizers))


def _block_residuals(graph: GameGraph, pairs: Iterable[tuple[int, int]]):
    """Stream W^1..W^{n-1}, collecting ||(W^k)_{ji}||_F per pair and ||W^k||_F.

    Powers are visited once and discarded, so memory stays O(n^2) regardless
    of how many pairs are read off.
    """
    pairs = list(pairs)
    dims = graph.dims
    n = graph.n
    residuals: dict[tuple[int, int], list[float]] = {p: [] for p in pairs}
    normalizers: list[float] = []
    Pk = graph.W
    for k in range(1, n):
        normalizers.append(float(np.linalg.norm(Pk)))
        for i, j in pairs:
            block = Pk[dims.block(j), dims.block(i)]
            residuals[(i, j)].append(float(np.linalg.norm(block)))
        if k < n - 1:
            Pk = Pk @ graph.W
    return residuals, normalizers


def _fraction_matrix(W: np.ndarray) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in W.tolist()]


def _fraction_matmul(A: list[list[Fraction]], B: list[list[Fraction]]) -> list[list[Fraction]]:
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in A]


def _fraction_norm(entries: Iterable[Fraction]) -> float:
    total = sum(x * x for x in entries)
    try:
        return float(total) ** 0.5
    except OverflowError:
        return float("inf")


def _exact_residuals(graph: GameGraph, pairs: Iterable[tuple[int, int]]):
    """Like _block_residuals but over exact rationals: zero means zero.

    Every float is an exactly representable rational, so the powers (and with
    them the verdict) carry no rounding at all.  Returns residuals,
    normalizers, and per-pair exact-zero flags per power.
    """
    pairs = list(pairs)
    dims = graph.dims
    n = graph.n
    Wf = _fraction_matrix(graph.W)
    residuals: dict[tuple[int, int], list[float]] = {p: [] for p in pairs}
    zero_flags: dict[tuple[int, int], list[bool]] = {p: [] for p in pairs}
    normalizers: list[float] = []
    Pk = Wf
    for k in range(1, n):
        normalizers.append(_fraction_norm(x for row in Pk for x in row))
        for i, j in pairs:
            rows = range(dims.offset(j), dims.offset(j) + dims.dims[j])
            cols = range(dims.offset(i), dims.offset(i) + dims.dims[i])
            block = [Pk[r][c] for r in rows for c in cols]
            residuals[(i, j)].append(_fraction_norm(block))
            zero_flags[(i, j)].append(all(x == 0 for x in block))
        if k < n - 1:
            Pk = _fraction_matmul(Pk, Wf)
    return residuals, normalizers, zero_flags


def check_algebraic(
    graph: GameGraph, query: DecouplingQuery, exact: bool = False
) -> DecouplingReport:
    """Decide decoupling by testing the (target, source) blocks of W^1..W^{n-1}.

    The disturbance subspace of the source and the coordinate complement of
    the target are axis-aligned, so the subspace-containment condition
    reduces to these blocks vanishing; they are read off the powers directly
    rather than through materialized selector matrices.

    With ``exact=True`` the powers are computed in rational arithmetic and
    the verdict is a tolerance-free exact-zero test (practical for small n).
    """
    _check_query(graph, query)
    pair = (query.source, query.target)
    if exact:
        residuals, normalizers, zero_flags = _exact_residuals(graph, [pair])
        verdict = all(zero_flags[pair])
    else:
        residuals, normalizers = _block_residuals(graph, [pair])
        verdict = _zero_test(residuals[pair], normalizers, query.tolerance)
    return DecouplingReport(
        query=query,
        verdict=verdict,
        residuals=tuple(residuals[pair]),
        normalizers=tuple(normalizers),
        method="algebraic",
        exact=exact,
    )


def _edge_blocks(graph: GameGraph, edge_zero_tol: float):
    """Adjacency lists and edge-weight blocks; self loops are always edges."""
    N = graph.n_players
    out: dict[int, list[int]] = {}
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for u in range(N):
        out[u] = []
        for v in range(N):
            block = graph.block(v, u)
            if u == v or np.abs(block).max(initial=0.0) > edge_zero_tol:
                out[u].append(v)
                blocks[(u, v)] = block
    return out, blocks


def _path_weight_sums(
    graph: GameGraph,
    source: int,
    target: int,
    edge_zero_tol: float,
    cap: int,
) -> list[np.ndarray]:
    """Sum path weights from source to target for every length 1..n-1.

    Literal enumeration: one running product is kept per path, grouped by the
    path's current endpoint so each edge extends a whole batch in one
    broadcast matmul.  The total number of extensions is capped.
    """
    dims = graph.dims
    n = graph.n
    out, blocks = _edge_blocks(graph, edge_zero_tol)
    n_src = dims.dims[source]
    frontier: dict[int, np.ndarray] = {
        source: np.eye(n_src)[np.newaxis, :, :]
    }
    sums: list[np.ndarray] = []
    extensions = 0
    for _ in range(1, n):
        grown: dict[int, list[np.ndarray]] = {}
        for u, stack in frontier.items():
            for v in out[u]:
                extensions += stack.shape[0]
                if extensions > cap:
                    raise PathEnumerationCapError(cap)
                grown.setdefault(v, []).append(blocks[(u, v)] @ stack)
        frontier = {
            v: parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)
            for v, parts in grown.items()
        }
        if target in frontier:
            sums.append(frontier[target].sum(axis=0))
        else:
            sums.append(np.zeros((dims.dims[target], n_src)))
    return sums


def check_paths(
    graph: GameGraph,
    query: DecouplingQuery,
    edge_zero_tol: float = 0.0,
    cap: int = ENUMERATION_CAP,
) -> DecouplingReport:
    """Decide decoupling by enumerating path-weight sums of every length < n.

    An edge (u -> v) exists when the block W_{vu} has an entry exceeding
    ``edge_zero_tol`` in magnitude; self loops always exist.  Pruning
    zero-weight edges cannot change the sums, only the work.  Raises
    PathEnumerationCapError when the graph is too connected to enumerate.
    """
    _check_query(graph, query)
    sums = _path_weight_sums(graph, query.source, query.target, edge_zero_tol, cap)
    residuals = [float(np.linalg.norm(s)) for s in sums]
    _, normalizers = _block_residuals(graph, [])
    verdict = _zero_test(residuals, normalizers, query.tolerance)
    return DecouplingReport(
        query=query,
        verdict=verdict,
        residuals=tuple(residuals),
        normalizers=tuple(normalizers),
        method="path-enumeration",
    )


def enumerate_paths(
    graph: GameGraph,
    source: int,
    target: int,
    length: int,
    edge_zero_tol: float = 0.0,
    max_paths: int = 100_000,
) -> PathSet:
    """List the paths of one exact length from source to target, with weights."""
    graph.dims._check_player(source)
    graph.dims._check_player(target)
    if length < 1:
        raise DimensionError("path length must be >= 1")
    out, blocks = _edge_blocks(graph, edge_zero_tol)
    n_src = graph.dims.dims[source]
    paths: list[tuple[int, ...]] = []
    weight_sum = np.zeros((graph.dims.dims[target], n_src))

    def extend(node: int, prefix: tuple[int, ...], product: np.ndarray, remaining: int):
        nonlocal weight_sum
        if remaining == 0:
            if node == target:
                if len(paths) >= max_paths:
                    raise PathEnumerationCapError(max_paths)
                paths.append(prefix)
                weight_sum = weight_sum + product
            return
        for v in out[node]:
            extend(v, prefix + (v,), blocks[(node, v)] @ product, remaining - 1)

    extend(source, (source,), np.eye(n_src), length)
    return PathSet(
        source=source,
        target=target,
        length=length,
        paths=tuple(paths),
        weight_sum=weight_sum,
    )


def all_pairs_report(
    graph: GameGraph, tolerance: float = DEFAULT_TOLERANCE
) -> list[DecouplingReport]:
    """Algebraic reports for every ordered pair, sharing one power sweep."""
    N = graph.n_players
    pairs = [(i, j) for i in range(N) for j in range(N) if i != j]
    residuals, normalizers = _block_residuals(graph, pairs)
    return [
        DecouplingReport(
            query=DecouplingQuery(i, j, tolerance),
            verdict=_zero_test(residuals[(i, j)], normalizers, tolerance),
            residuals=tuple(residuals[(i, j)]),
            normalizers=tuple(normalizers),
            method="algebraic",
        )
        for i, j in pairs
    ]


class SymmetryRecord(NamedTuple):
    """Both-direction verdicts for one unordered player pair."""

    pair: tuple[int, int]
    forward: bool
    backward: bool


def check_potential_symmetry(
    game: QuadraticGame,
    gamma: StepSizes,
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[SymmetryRecord]:
    """Check that decoupling is direction-symmetric on a potential game.

    Requires the potential premise P_ij == P_ji^T (raises
    NotPotentialGameError otherwise), then runs the algebraic test in both
    directions for every unordered pair.  On a potential game the two
    verdicts provably agree for any positive step sizes.
    """
    N = game.n_players
    for i in range(N):
        for j in range(i + 1, N):
            Pij = game.cross_block(i, j)
            Pji = game.cross_block(j, i)
            scale = max(1.0, float(np.linalg.norm(Pij)))
            if float(np.linalg.norm(Pij - Pji.T)) > tolerance * scale:
                raise NotPotentialGameError(
                    f"cross blocks ({i},{j}) and ({j},{i}) are not transposes: "
                    "not a potential game"
                )
    graph = build_game_graph(game, gamma)
    pairs = [(i, j) for i in range(N) for j in range(N) if i != j]
    residuals, normalizers = _block_residuals(graph, pairs)
    records = []
    for i in range(N):
        for j in range(i + 1, N):
            fwd = _zero_test(residuals[(i, j)], normalizers, tolerance)
            bwd = _zero_test(residuals[(j, i)], normalizers, tolerance)
            records.append(SymmetryRecord(pair=(i, j), forward=fwd, backward=bwd))
    return records
