"""Shared instance factories for the test suite."""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from gamegraph import (
    GameGraph,
    LQGameSpec,
    QuadraticGame,
    StepSizes,
    build_game_graph,
    game_jacobian,
    lift,
    uniform_step_size,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

HALF_SQRT2 = float(np.sqrt(0.5))


def diamond_graph(t1, t2, b1, b2, loops, gamma=None) -> GameGraph:
    """Four scalar players: 0 -> {1, 2} -> 3, symmetric edge weights.

    ``t1``/``t2`` weight the top route 0-1-3, ``b1``/``b2`` the bottom route
    0-2-3; ``loops`` are the four self-loop weights.  Player 3 is decoupled
    from player 0 iff t1*t2 + b1*b2 == 0 and loops[1] == loops[2].
    """
    s1, s2, s3, s4 = loops
    W = np.array(
        [
            [s1, t1, b1, 0.0],
            [t1, s2, 0.0, t2],
            [b1, 0.0, s3, b2],
            [0.0, t2, b2, s4],
        ]
    )
    return GameGraph.from_matrix([1, 1, 1, 1], W, gamma=gamma)


def _contractive(graph: GameGraph) -> GameGraph:
    """Rescale W to spectral radius <= 0.95.

    Uniform scaling multiplies every length-k path weight by the same factor,
    so it preserves the cancellation structure (and the equal middle loops)
    while keeping long simulations from amplifying rounding exponentially.
    """
    radius = np.abs(np.linalg.eigvals(graph.W)).max()
    if radius <= 0.95:
        return graph
    return GameGraph.from_matrix(graph.dims, graph.W * (0.95 / radius))


def random_decoupled_diamond(rng) -> GameGraph:
    """Contractive diamond instance with weights satisfying the cancellation."""
    t1, t2, b1 = rng.uniform(0.3, 1.0, size=3) * rng.choice([-1.0, 1.0], size=3)
    b2 = -t1 * t2 / b1
    s_mid = rng.uniform(0.2, 0.8)
    loops = (rng.uniform(0.2, 0.8), s_mid, s_mid, rng.uniform(0.2, 0.8))
    return _contractive(diamond_graph(t1, t2, b1, b2, loops))


def random_coupled_diamond(rng) -> GameGraph:
    """Contractive diamond instance violating the cancellation by a clear margin."""
    t1, t2, b1 = rng.uniform(0.3, 1.0, size=3) * rng.choice([-1.0, 1.0], size=3)
    b2 = -t1 * t2 / b1 + rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 0.6)
    s_mid = rng.uniform(0.2, 0.8)
    loops = (rng.uniform(0.2, 0.8), s_mid, s_mid, rng.uniform(0.2, 0.8))
    return _contractive(diamond_graph(t1, t2, b1, b2, loops))


def random_quadratic_game(
    rng,
    n_players: int | None = None,
    max_dim: int = 2,
    zero_prob: float = 0.3,
    symmetric_own: bool = True,
) -> QuadraticGame:
    """Random game with uniform [-1, 1] entries and ~zero_prob pruned couplings."""
    N = int(n_players if n_players is not None else rng.integers(2, 6))
    dims = [int(d) for d in rng.integers(1, max_dim + 1, size=N)]
    own = []
    for d in dims:
        M = rng.uniform(-1.0, 1.0, size=(d, d))
        own.append(0.5 * (M + M.T) if symmetric_own else M)
    cross = {}
    for i in range(N):
        for j in range(N):
            if i != j and rng.random() >= zero_prob:
                cross[(i, j)] = rng.uniform(-1.0, 1.0, size=(dims[i], dims[j]))
    r = [rng.uniform(-1.0, 1.0, size=d) for d in dims]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return QuadraticGame(dims, own, cross, r)


def random_potential_game(rng, n_players: int | None = None, max_dim: int = 2,
                          zero_prob: float = 0.3) -> QuadraticGame:
    """Random game with P_ij == P_ji^T for every coupled pair."""
    N = int(n_players if n_players is not None else rng.integers(2, 6))
    dims = [int(d) for d in rng.integers(1, max_dim + 1, size=N)]
    own = []
    for d in dims:
        M = rng.uniform(-1.0, 1.0, size=(d, d))
        own.append(0.5 * (M + M.T))
    cross = {}
    for i in range(N):
        for j in range(i + 1, N):
            if rng.random() >= zero_prob:
                block = rng.uniform(-1.0, 1.0, size=(dims[i], dims[j]))
                cross[(i, j)] = block
                cross[(j, i)] = block.T
    r = [rng.uniform(-1.0, 1.0, size=d) for d in dims]
    return QuadraticGame(dims, own, cross, r)


def random_step_sizes(rng, n_players: int) -> StepSizes:
    return StepSizes(rng.uniform(0.05, 0.5, size=n_players))


# Pull directions of the four-player target-steering demo.  The middle two
# players pull along the diagonals, so their projections onto players 1 and 4
# cancel pairwise: B1.B2 = B1.B3 = B2.B4 = 1/sqrt(2), B3.B4 = -1/sqrt(2),
# and B1.B4 = B2.B3 = 0.
TUG_PULLS = (
    np.array([[1.0], [0.0]]),
    np.array([[HALF_SQRT2], [HALF_SQRT2]]),
    np.array([[HALF_SQRT2], [-HALF_SQRT2]]),
    np.array([[0.0], [1.0]]),
)

TUG_TARGETS = (
    np.array([1.0, 1.0]),
    np.array([-1.0, 1.0]),
    np.array([-1.0, -1.0]),
    np.array([1.0, -1.0]),
)

# Gram profile of the stacked response maps for A = I and ten penalized
# state time points: entry (s, s') counts the steps on which both controls
# u^s and u^s' have already acted.
HORIZON_GRAM = np.array(
    [
        [9, 8, 7, 6, 5, 4, 3, 2, 1],
        [8, 8, 7, 6, 5, 4, 3, 2, 1],
        [7, 7, 7, 6, 5, 4, 3, 2, 1],
        [6, 6, 6, 6, 5, 4, 3, 2, 1],
        [5, 5, 5, 5, 5, 4, 3, 2, 1],
        [4, 4, 4, 4, 4, 4, 3, 2, 1],
        [3, 3, 3, 3, 3, 3, 3, 2, 1],
        [2, 2, 2, 2, 2, 2, 2, 2, 1],
        [1, 1, 1, 1, 1, 1, 1, 1, 1],
    ],
    dtype=float,
)


def tug_of_war_spec(z0=None, targets=TUG_TARGETS, control_weight=10.0) -> LQGameSpec:
    """Planar target-steering game: four players, ten penalized time points."""
    if z0 is None:
        z0 = np.array([0.5, -0.25])
    return LQGameSpec(
        A=np.eye(2),
        B=list(TUG_PULLS),
        Q=[np.eye(2)] * 4,
        R=[np.array([[control_weight]])] * 4,
        horizon=9,
        z0=z0,
        targets=list(targets),
    )


def tug_of_war_graph(z0=None):
    """Lifted game and its graph under the spectral uniform step size."""
    lifted = lift(tug_of_war_spec(z0=z0))
    rule = uniform_step_size(game_jacobian(lifted.game))
    gamma = StepSizes.uniform(rule.gamma, 4)
    return lifted, build_game_graph(lifted.game, gamma)
