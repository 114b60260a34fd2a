"""Corrupted vs. uncorrupted gradient-play simulation on a game graph.

The clean recursion is x^{k+1} = W x^k - offset; the corrupted one injects a
per-iteration disturbance confined to one player's gradient,

    y^{k+1} = W y^k - offset - Gamma d^k,

with d^k zero outside the source player's block.  :func:`compare` runs both
from the same start point and reports each player's worst-case action
deviation plus the cost series of both runs, which is how decoupling (or its
absence) shows up empirically.

A caveat for expansive dynamics: when the spectral radius of W exceeds one,
rounding injected at every step is amplified exponentially, so a decoupled
target can show deviations far above machine epsilon after many iterations
even though the exact-arithmetic deviation is identically zero.  Empirical
decoupling comparisons are meaningful for convergent clean dynamics.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import GameGraph, PlayerDims, QuadraticGame
from .errors import DimensionError, DivergenceError

__all__ = [
    "DisturbanceSignal",
    "Trajectory",
    "DeviationReport",
    "run",
    "compare",
    "magnitude_sweep",
]

THREADS_ENV = "DECOUPLING_THREADS"


@dataclass(frozen=True)
class DisturbanceSignal:
    """Per-iteration gradient disturbance confined to one player's block.

    Use the factory classmethods; kinds:

    * ``zero`` -- no disturbance.
    * ``constant`` -- the same vector every iteration.
    * ``impulse`` -- one vector at a single iteration.
    * ``uniform`` -- fresh draws, uniform on the ball ||d|| <= bound,
      deterministic given (seed, iteration order).
    * ``explicit`` -- a caller-provided schedule (zero past its end).
    """

    player: int
    kind: str
    value: tuple[float, ...] | None = None
    at: int = 0
    seed: object = None
    bound: float | None = None
    vectors: tuple[tuple[float, ...], ...] | None = field(default=None, repr=False)

    @classmethod
    def zero(cls, player: int) -> "DisturbanceSignal":
        return cls(player=player, kind="zero")

    @classmethod
    def constant(cls, player: int, value) -> "DisturbanceSignal":
        return cls(player=player, kind="constant", value=tuple(np.atleast_1d(value).tolist()))

    @classmethod
    def impulse(cls, player: int, value, at: int = 0) -> "DisturbanceSignal":
        if at < 0:
            raise DimensionError("impulse iteration must be nonnegative")
        return cls(player=player, kind="impulse",
                   value=tuple(np.atleast_1d(value).tolist()), at=at)

    @classmethod
    def seeded_uniform(cls, player: int, seed, bound: float) -> "DisturbanceSignal":
        if bound < 0:
            raise DimensionError("disturbance bound must be nonnegative")
        return cls(player=player, kind="uniform", seed=seed, bound=float(bound))

    @classmethod
    def explicit(cls, player: int, vectors: Sequence) -> "DisturbanceSignal":
        vecs = tuple(tuple(np.atleast_1d(v).tolist()) for v in vectors)
        return cls(player=player, kind="explicit", vectors=vecs)

    def schedule(self, dims: PlayerDims, steps: int) -> np.ndarray:
        """The source-player disturbance d^k for k = 0..steps-1, shape (steps, n_i)."""
        dims._check_player(self.player)
        ni = dims.dims[self.player]
        out = np.zeros((steps, ni))
        if self.kind == "zero":
            return out
        if self.kind == "constant":
            vec = np.asarray(self.value, dtype=float)
            if vec.shape != (ni,):
                raise DimensionError(f"disturbance vector must have length {ni}")
            out[:] = vec
            return out
        if self.kind == "impulse":
            vec = np.asarray(self.value, dtype=float)
            if vec.shape != (ni,):
                raise DimensionError(f"disturbance vector must have length {ni}")
            if self.at < steps:
                out[self.at] = vec
            return out
        if self.kind == "uniform":
            rng = np.random.default_rng(self.seed)
            for k in range(steps):
                direction = rng.standard_normal(ni)
                norm = np.linalg.norm(direction)
                if norm == 0.0:
                    continue
                radius = self.bound * rng.random() ** (1.0 / ni)
                out[k] = (radius / norm) * direction
            return out
        if self.kind == "explicit":
            for k, vec in enumerate(self.vectors or ()):
                if k >= steps:
                    break
                v = np.asarray(vec, dtype=float)
                if v.shape != (ni,):
                    raise DimensionError(f"disturbance vector must have length {ni}")
                out[k] = v
            return out
        raise DimensionError(f"unknown disturbance kind {self.kind!r}")

    def joint_schedule(self, dims: PlayerDims, steps: int) -> np.ndarray:
        """The schedule embedded in R^n, zero outside the source player's block."""
        joint = np.zeros((steps, dims.total))
        joint[:, dims.block(self.player)] = self.schedule(dims, steps)
        return joint


@dataclass(frozen=True)
class Trajectory:
    """Iterate sequence x^0..x^K with the disturbances actually applied."""

    dims: PlayerDims
    iterates: np.ndarray = field(repr=False)
    disturbance_log: np.ndarray = field(repr=False)
    game: QuadraticGame | None = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return self.iterates.shape[0] - 1

    def per_player(self, i: int, k: int | None = None) -> np.ndarray:
        """Player i's slice of iterate k, or of the whole sequence."""
        block = self.dims.block(i)
        if k is None:
            return self.iterates[:, block]
        return self.iterates[k, block]

    def costs(self, i: int, k: int | None = None):
        """f_i along the trajectory; needs the graph to have come from a game."""
        if self.game is None:
            raise DimensionError("no quadratic game attached; costs are unavailable")
        if k is not None:
            return self.game.cost(i, self.iterates[k])
        return np.array([self.game.cost(i, x) for x in self.iterates])


def run(
    graph: GameGraph,
    x0,
    steps: int,
    disturbance: DisturbanceSignal | None = None,
) -> Trajectory:
    """Iterate the (possibly corrupted) dynamics for ``steps`` iterations.

    Raises DivergenceError at the first non-finite iterate; the exception
    carries the finite prefix as a partial trajectory.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = graph.n
    if x0.shape != (n,):
        raise DimensionError(f"x0 must have length {n}, got {x0.shape}")
    if steps < 0:
        raise DimensionError("steps must be >= 0")
    if disturbance is None:
        d_joint = np.zeros((steps, n))
    else:
        d_joint = disturbance.joint_schedule(graph.dims, steps)
    gamma_diag = graph.gamma.diagonal(graph.dims)
    iterates = np.empty((steps + 1, n))
    iterates[0] = x0
    for k in range(steps):
        # overflow surfaces as the DivergenceError below, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            nxt = graph.W @ iterates[k] - graph.offset - gamma_diag * d_joint[k]
        if not np.all(np.isfinite(nxt)):
            partial = Trajectory(
                dims=graph.dims,
                iterates=iterates[: k + 1].copy(),
                disturbance_log=d_joint[:k].copy(),
                game=graph.game,
            )
            raise DivergenceError(k + 1, partial)
        iterates[k + 1] = nxt
    return Trajectory(
        dims=graph.dims,
        iterates=iterates,
        disturbance_log=d_joint,
        game=graph.game,
    )


@dataclass(frozen=True)
class DeviationReport:
    """Per-player deviation of the corrupted run from the clean run.

    ``max_deviation[j]`` is max_k ||y_j^k - x_j^k||, ``rel_deviation[j]``
    divides by max(1, max_k ||x_j^k||); ``deviation_series`` keeps the whole
    ||y_j^k - x_j^k|| history.  Cost series are included when the graph came
    from a quadratic game (actions can be decoupled while costs are not).
    When the corrupted run diverges, comparisons cover the common finite
    prefix and ``diverged_at`` records the first bad iteration.
    """

    source: int | None
    bound: float | None
    steps: int
    max_deviation: np.ndarray
    rel_deviation: np.ndarray
    deviation_series: np.ndarray = field(repr=False)
    diverged_at: int | None = None
    clean_costs: np.ndarray | None = field(default=None, repr=False)
    corrupted_costs: np.ndarray | None = field(default=None, repr=False)


def _row_norms(rows: np.ndarray) -> np.ndarray:
    """Euclidean norm per row, scaled to stay finite near the overflow edge."""
    peak = np.abs(rows).max(axis=1)
    out = np.zeros(rows.shape[0])
    big = peak > 0
    scaled = rows[big] / peak[big, np.newaxis]
    out[big] = peak[big] * np.sqrt((scaled * scaled).sum(axis=1))
    return out


def compare(
    graph: GameGraph,
    x0,
    steps: int,
    disturbance: DisturbanceSignal,
) -> DeviationReport:
    """Run the clean and corrupted recursions from the same start and diff them."""
    clean = run(graph, x0, steps, None)
    diverged_at = None
    try:
        corrupted = run(graph, x0, steps, disturbance)
    except DivergenceError as err:
        corrupted = err.trajectory
        diverged_at = err.iteration
    K = min(clean.steps, corrupted.steps)
    N = graph.n_players
    series = np.zeros((N, K + 1))
    max_dev = np.zeros(N)
    rel_dev = np.zeros(N)
    for j in range(N):
        diff = corrupted.per_player(j)[: K + 1] - clean.per_player(j)[: K + 1]
        series[j] = _row_norms(diff)
        max_dev[j] = series[j].max(initial=0.0)
        clean_scale = _row_norms(clean.per_player(j)[: K + 1]).max(initial=0.0)
        rel_dev[j] = max_dev[j] / max(1.0, clean_scale)
    clean_costs = corrupted_costs = None
    if graph.game is not None:
        clean_costs = np.array([clean.costs(j)[: K + 1] for j in range(N)])
        corrupted_costs = np.array([corrupted.costs(j)[: K + 1] for j in range(N)])
    return DeviationReport(
        source=disturbance.player,
        bound=disturbance.bound,
        steps=K,
        max_deviation=max_dev,
        rel_deviation=rel_dev,
        deviation_series=series,
        diverged_at=diverged_at,
        clean_costs=clean_costs,
        corrupted_costs=corrupted_costs,
    )


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap is not None:
        try:
            cap_val = max(1, int(cap))
        except ValueError:
            raise DimensionError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    else:
        cap_val = os.cpu_count() or 1
    return max(1, min(n_jobs, cap_val))


def magnitude_sweep(
    graph: GameGraph,
    x0,
    steps: int,
    player: int,
    bounds: Sequence[float],
    seed: int = 0,
) -> list[DeviationReport]:
    """One compare run per disturbance bound, with independent seeded draws.

    Bounds must be nondecreasing.  Each bound gets its own generator derived
    from (seed, bound index), so reports are reproducible individually and
    independent of evaluation order; sweeps run on a thread pool capped by
    the DECOUPLING_THREADS environment variable.
    """
    bounds = [float(b) for b in bounds]
    if any(b < 0 for b in bounds):
        raise DimensionError("bounds must be nonnegative")
    if any(b2 < b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise DimensionError("bounds must be nondecreasing")

    def one(idx_bound):
        idx, bound = idx_bound
        signal = DisturbanceSignal.seeded_uniform(player, (seed, idx), bound)
        report = compare(graph, x0, steps, signal)
        return report

    jobs = list(enumerate(bounds))
    workers = _worker_count(len(jobs))
    if workers == 1 or len(jobs) <= 1:
        return [one(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))
