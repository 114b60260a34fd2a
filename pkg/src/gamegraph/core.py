"""Quadratic games, their game graphs, Nash equilibria, and step sizes.

An N-player quadratic game assigns player ``i`` the cost

    f_i(x) = 1/2 x_i^T P_i x_i + x_i^T (sum_{j != i} P_ij x_j + r_i)

over a joint action x = (x_1, ..., x_N).  Simultaneous gradient play with
step sizes gamma_i is the linear recursion

    x^{k+1} = W x^k - Gamma rbar

whose block operator W (W_ii = I - gamma_i P_i, W_ij = -gamma_i P_ij) is the
adjacency matrix of the directed *game graph*: edge (j -> i) exists whenever
the block W_ij is nonzero, and every node carries a self loop.

Players are indexed 0..N-1 throughout the Python API.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, SingularGameError, StepSizeRuleError

__all__ = [
    "PlayerDims",
    "StepSizes",
    "QuadraticGame",
    "GameGraph",
    "build_game_graph",
    "game_jacobian",
    "game_from_graph",
    "nash_equilibrium",
    "uniform_step_size",
    "StepSizeRule",
    "SINGULAR_RCOND",
]

# Reciprocal condition number below which the stacked first-order system is
# treated as singular.
SINGULAR_RCOND = 1e-12


def _as_matrix(value, rows: int, cols: int, name: str) -> np.ndarray:
    mat = np.asarray(value, dtype=float)
    if mat.shape != (rows, cols):
        raise DimensionError(f"{name} must be {rows}x{cols}, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DimensionError(f"{name} contains non-finite entries")
    return mat


def _as_vector(value, length: int, name: str) -> np.ndarray:
    vec = np.asarray(value, dtype=float).reshape(-1)
    if vec.shape != (length,):
        raise DimensionError(f"{name} must have length {length}, got shape {np.shape(value)}")
    if not np.all(np.isfinite(vec)):
        raise DimensionError(f"{name} contains non-finite entries")
    return vec


@dataclass(frozen=True)
class PlayerDims:
    """Per-player action dimensions and the induced block layout of R^n."""

    dims: tuple[int, ...]

    def __init__(self, dims: Sequence[int]):
        dims = tuple(int(d) for d in dims)
        if len(dims) == 0:
            raise DimensionError("at least one player is required")
        if any(d < 1 for d in dims):
            raise DimensionError(f"every player dimension must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_players(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    def offset(self, i: int) -> int:
        self._check_player(i)
        return sum(self.dims[:i])

    def block(self, i: int) -> slice:
        """Index slice selecting player ``i``'s coordinates in a joint vector."""
        off = self.offset(i)
        return slice(off, off + self.dims[i])

    def _check_player(self, i: int) -> None:
        if not 0 <= i < len(self.dims):
            raise DimensionError(f"player index {i} out of range for {len(self.dims)} players")


@dataclass(frozen=True)
class StepSizes:
    """Positive per-player step sizes gamma_i."""

    values: tuple[float, ...]

    def __init__(self, values: Sequence[float]):
        values = tuple(float(g) for g in values)
        if any(not np.isfinite(g) or g <= 0 for g in values):
            raise DimensionError(f"step sizes must be positive and finite, got {values}")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, gamma: float, n_players: int) -> "StepSizes":
        return cls([gamma] * n_players)

    def diagonal(self, dims: PlayerDims) -> np.ndarray:
        """The diagonal of Gamma = blkdiag(gamma_1 I_{n_1}, ..., gamma_N I_{n_N})."""
        if len(self.values) != dims.n_players:
            raise DimensionError(
                f"{len(self.values)} step sizes for {dims.n_players} players"
            )
        return np.repeat(np.asarray(self.values), np.asarray(dims.dims))


class QuadraticGame:
    """Quadratic game defined by own-cost blocks P_i, couplings P_ij, offsets r_i.

    ``cross`` maps ordered pairs (i, j), i != j, to the n_i x n_j coupling
    block; omitted pairs are zero.  P_i is used as written in the gradient
    (D_i f_i = P_i x_i + sum_j P_ij x_j + r_i); an asymmetric P_i is accepted
    but flagged, since the quadratic form only determines its symmetric part.
    """

    def __init__(
        self,
        dims: PlayerDims | Sequence[int],
        P: Sequence,
        cross: Mapping[tuple[int, int], object] | None = None,
        r: Sequence | None = None,
    ):
        if not isinstance(dims, PlayerDims):
            dims = PlayerDims(dims)
        self.dims = dims
        N = dims.n_players
        if len(P) != N:
            raise DimensionError(f"expected {N} own-cost blocks, got {len(P)}")
        self.P = [
            _as_matrix(P[i], dims.dims[i], dims.dims[i], f"P[{i}]") for i in range(N)
        ]
        for i, Pi in enumerate(self.P):
            if not np.allclose(Pi, Pi.T, rtol=0.0, atol=1e-12 * max(1.0, abs(Pi).max())):
                warnings.warn(
                    f"P[{i}] is asymmetric; the gradient uses P_i x_i as written",
                    stacklevel=2,
                )
        self.cross: dict[tuple[int, int], np.ndarray] = {}
        for (i, j), block in (cross or {}).items():
            dims._check_player(i)
            dims._check_player(j)
            if i == j:
                raise DimensionError(f"cross block ({i},{j}) must have i != j")
            self.cross[(i, j)] = _as_matrix(
                block, dims.dims[i], dims.dims[j], f"P[{i},{j}]"
            )
        if r is None:
            r = [np.zeros(d) for d in dims.dims]
        if len(r) != N:
            raise DimensionError(f"expected {N} offset vectors, got {len(r)}")
        self.r = [_as_vector(r[i], dims.dims[i], f"r[{i}]") for i in range(N)]

    @property
    def n_players(self) -> int:
        return self.dims.n_players

    def cross_block(self, i: int, j: int) -> np.ndarray:
        """P_ij, a zero block when the pair is uncoupled."""
        if (i, j) in self.cross:
            return self.cross[(i, j)]
        return np.zeros((self.dims.dims[i], self.dims.dims[j]))

    def stacked_offset(self) -> np.ndarray:
        """rbar, the concatenation of the r_i."""
        return np.concatenate(self.r)

    def cost(self, i: int, x: np.ndarray) -> float:
        """Evaluate f_i at a joint action."""
        x = _as_vector(x, self.dims.total, "x")
        xi = x[self.dims.block(i)]
        coupling = self.r[i].copy()
        for j in range(self.n_players):
            if j != i and (i, j) in self.cross:
                coupling += self.cross[(i, j)] @ x[self.dims.block(j)]
        return float(0.5 * xi @ self.P[i] @ xi + xi @ coupling)

    def gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        """D_i f_i(x) = P_i x_i + sum_{j != i} P_ij x_j + r_i."""
        x = _as_vector(x, self.dims.total, "x")
        grad = self.P[i] @ x[self.dims.block(i)] + self.r[i]
        for j in range(self.n_players):
            if j != i and (i, j) in self.cross:
                grad = grad + self.cross[(i, j)] @ x[self.dims.block(j)]
        return grad

    def is_potential(self, tolerance: float = 1e-9) -> bool:
        """Whether P_ij == P_ji^T for every pair, within a relative tolerance."""
        for i in range(self.n_players):
            for j in range(i + 1, self.n_players):
                Pij = self.cross_block(i, j)
                Pji = self.cross_block(j, i)
                scale = max(1.0, float(np.linalg.norm(Pij)))
                if np.linalg.norm(Pij - Pji.T) > tolerance * scale:
                    return False
        return True


@dataclass(frozen=True)
class GameGraph:
    """Block adjacency matrix of the learning dynamics x^{k+1} = W x^k - offset.

    ``offset`` equals Gamma rbar when the graph is built from a game; direct
    constructions may pass any vector (commonly zero).  ``game`` retains the
    source game, when there is one, so simulations can report player costs.
    """

    dims: PlayerDims
    W: np.ndarray = field(repr=False)
    gamma: StepSizes
    offset: np.ndarray = field(repr=False)
    game: QuadraticGame | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = self.dims.total
        W = _as_matrix(self.W, n, n, "W")
        offset = _as_vector(self.offset, n, "offset")
        W.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def from_matrix(
        cls,
        dims: Sequence[int] | PlayerDims,
        W,
        gamma: StepSizes | Sequence[float] | None = None,
        offset=None,
        game: QuadraticGame | None = None,
    ) -> "GameGraph":
        """Wrap an explicit adjacency matrix (unit step sizes, zero offset by default)."""
        if not isinstance(dims, PlayerDims):
            dims = PlayerDims(dims)
        if gamma is None:
            gamma = StepSizes.uniform(1.0, dims.n_players)
        elif not isinstance(gamma, StepSizes):
            gamma = StepSizes(gamma)
        if offset is None:
            offset = np.zeros(dims.total)
        return cls(dims=dims, W=np.array(W, dtype=float), gamma=gamma,
                   offset=np.array(offset, dtype=float), game=game)

    @property
    def n(self) -> int:
        return self.dims.total

    @property
    def n_players(self) -> int:
        return self.dims.n_players

    def block(self, i: int, j: int) -> np.ndarray:
        """Block W_ij (the weight of edge j -> i)."""
        return self.W[self.dims.block(i), self.dims.block(j)]

    def has_edge(self, src: int, dst: int, tol: float = 0.0) -> bool:
        """Whether edge src -> dst exists: self loops always, else block nonzero."""
        if src == dst:
            return True
        return bool(np.abs(self.block(dst, src)).max(initial=0.0) > tol)

    def out_neighbors(self, src: int, tol: float = 0.0) -> list[int]:
        return [dst for dst in range(self.n_players) if self.has_edge(src, dst, tol)]


def game_jacobian(game: QuadraticGame) -> np.ndarray:
    """Step-size-free block matrix J with J_ii = P_i and J_ij = P_ij.

    Satisfies build_game_graph(game, gamma).W == I - Gamma @ J elementwise.
    """
    n = game.dims.total
    J = np.zeros((n, n))
    for i in range(game.n_players):
        J[game.dims.block(i), game.dims.block(i)] = game.P[i]
        for j in range(game.n_players):
            if i != j and (i, j) in game.cross:
                J[game.dims.block(i), game.dims.block(j)] = game.cross[(i, j)]
    return J


def build_game_graph(game: QuadraticGame, gamma: StepSizes) -> GameGraph:
    """Assemble W_ii = I - gamma_i P_i, W_ij = -gamma_i P_ij, offset = Gamma rbar."""
    if len(gamma.values) != game.n_players:
        raise DimensionError(
            f"{len(gamma.values)} step sizes for {game.n_players} players"
        )
    dims = game.dims
    n = dims.total
    W = np.zeros((n, n))
    for i in range(game.n_players):
        gi = gamma.values[i]
        W[dims.block(i), dims.block(i)] = np.eye(dims.dims[i]) - gi * game.P[i]
        for j in range(game.n_players):
            if i != j:
                block = game.cross.get((i, j))
                if block is not None:
                    W[dims.block(i), dims.block(j)] = -gi * block
    offset = gamma.diagonal(dims) * game.stacked_offset()
    return GameGraph(dims=dims, W=W, gamma=gamma, offset=offset, game=game)


def game_from_graph(graph: GameGraph) -> QuadraticGame:
    """Recover the quadratic game whose gradient dynamics produce ``graph``.

    Inverts the Eq-style block map: P_i = (I - W_ii)/gamma_i,
    P_ij = -W_ij/gamma_i, r_i = offset_i/gamma_i.
    """
    dims = graph.dims
    P = []
    cross = {}
    r = []
    for i in range(graph.n_players):
        gi = graph.gamma.values[i]
        P.append((np.eye(dims.dims[i]) - graph.block(i, i)) / gi)
        r.append(np.asarray(graph.offset[dims.block(i)]) / gi)
        for j in range(graph.n_players):
            if i != j:
                block = graph.block(i, j)
                if np.any(block != 0.0):
                    cross[(i, j)] = -block / gi
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return QuadraticGame(dims, P, cross, r)


def nash_equilibrium(game: QuadraticGame, rcond_threshold: float = SINGULAR_RCOND) -> np.ndarray:
    """Solve the stacked first-order conditions J x = -rbar for the equilibrium.

    The solution is the unique joint action at which every player's gradient
    vanishes, hence the fixed point x = W x - Gamma rbar for every step-size
    choice.  Raises SingularGameError when J's reciprocal condition number
    falls below ``rcond_threshold``.
    """
    J = game_jacobian(game)
    svals = np.linalg.svd(J, compute_uv=False)
    rcond = float(svals[-1] / svals[0]) if svals[0] > 0 else 0.0
    if rcond < rcond_threshold:
        raise SingularGameError(rcond, rcond_threshold)
    return np.linalg.solve(J, -game.stacked_offset())


class StepSizeRule(NamedTuple):
    """Uniform step size with its spectral diagnostics."""

    gamma: float
    alpha: float
    beta: float


def uniform_step_size(J: np.ndarray) -> StepSizeRule:
    """Uniform step size gamma = sqrt(alpha)/beta from the step-size-free matrix J.

    alpha = lambda_min(1/4 (J + J^T)^T (J + J^T)) and beta = lambda_max(J^T J).
    Raises StepSizeRuleError when alpha is not strictly positive, i.e. when
    the symmetrized matrix is singular and the rule gives no usable rate.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise DimensionError(f"J must be square, got shape {J.shape}")
    if not np.any(J):
        raise StepSizeRuleError("step-size rule inapplicable: J is zero")
    S = J + J.T
    alpha = float(np.linalg.eigvalsh(0.25 * (S.T @ S)).min())
    beta = float(np.linalg.eigvalsh(J.T @ J).max())
    if alpha <= 0.0:
        raise StepSizeRuleError(
            f"step-size rule inapplicable: alpha={alpha:.3e} is not positive"
        )
    return StepSizeRule(gamma=float(np.sqrt(alpha) / beta), alpha=alpha, beta=beta)
