"""Two-player bilinear games under simultaneous or alternating gradient play.

Costs are f_1(x_1, x_2) = x_1^T A x_2 and f_2(x_1, x_2) = x_1^T B^T x_2.
Simultaneous play iterates both gradients at once; alternating play lets
player 2 respond to player 1's fresh move, which folds a B A correction into
player 2's diagonal block:

    W_s = [[I, -g1 A], [-g2 B, I]]
    W_a = [[I, -g1 A], [-g2 B, I + g1 g2 B A]]

The returned graph treats every scalar coordinate as its own node, so the
generic decoupling tests answer coordinate-level questions directly.  The
necessary conditions below are what coordinate-level decoupling forces on
the payoff matrices; they hold for both update rules and do not involve the
step sizes.
"""

from __future__ import annotations

import numpy as np

from .core import GameGraph, PlayerDims, StepSizes
from .errors import DimensionError

__all__ = [
    "BilinearGameSpec",
    "build_bilinear_graph",
    "coordinate_node",
    "same_side_necessary_condition",
    "cross_side_necessary_condition",
    "CONDITION_TOL",
]

# Absolute zero test for the payoff-matrix conditions.
CONDITION_TOL = 1e-12

_MODES = ("simultaneous", "alternating")


class BilinearGameSpec:
    """Payoff matrices A (n1 x n2), B (n2 x n1), step sizes, and update mode.

    Zero step sizes are tolerated (they freeze the corresponding update and
    give W = I); the payoff-matrix conditions never look at them.
    """

    def __init__(self, A, B, gamma1: float, gamma2: float, mode: str):
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        if self.A.ndim != 2 or self.B.ndim != 2:
            raise DimensionError("A and B must be matrices")
        n1, n2 = self.A.shape
        if self.B.shape != (n2, n1):
            raise DimensionError(
                f"B must be {n2}x{n1} to pair with A of shape {self.A.shape}, "
                f"got {self.B.shape}"
            )
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise DimensionError("step sizes must be nonnegative")
        if mode not in _MODES:
            raise DimensionError(f"mode must be one of {_MODES}, got {mode!r}")
        self.mode = mode

    @property
    def n1(self) -> int:
        return self.A.shape[0]

    @property
    def n2(self) -> int:
        return self.A.shape[1]


def coordinate_node(spec: BilinearGameSpec, side: int, index: int) -> int:
    """Graph node of coordinate ``index`` (0-based) of player ``side`` (1 or 2)."""
    if side == 1:
        limit = spec.n1
        base = 0
    elif side == 2:
        limit = spec.n2
        base = spec.n1
    else:
        raise DimensionError(f"side must be 1 or 2, got {side}")
    if not 0 <= index < limit:
        raise DimensionError(f"coordinate {index} out of range for side {side}")
    return base + index


def build_bilinear_graph(spec: BilinearGameSpec) -> GameGraph:
    """Game graph of the chosen update rule over scalar coordinate nodes."""
    n1, n2 = spec.n1, spec.n2
    g1, g2 = spec.gamma1, spec.gamma2
    lower_right = np.eye(n2)
    if spec.mode == "alternating":
        lower_right = lower_right + g1 * g2 * (spec.B @ spec.A)
    W = np.block([
        [np.eye(n1), -g1 * spec.A],
        [-g2 * spec.B, lower_right],
    ])
    dims = PlayerDims([1] * (n1 + n2))
    # Step-size bookkeeping per coordinate; a frozen side (zero step) keeps a
    # unit placeholder since its dynamics row is exactly the identity.
    gammas = [g1 if g1 > 0 else 1.0] * n1 + [g2 if g2 > 0 else 1.0] * n2
    return GameGraph(
        dims=dims,
        W=W,
        gamma=StepSizes(gammas),
        offset=np.zeros(n1 + n2),
    )


def same_side_necessary_condition(
    spec: BilinearGameSpec, side: int, i: int, j: int
) -> tuple[bool, float]:
    """Condition forced by decoupling coordinate j from coordinate i of one player.

    For side 1 the length-two paths i -> (2, l) -> j carry total weight
    proportional to sum_l b_{li} a_{jl} = (A B)_{ji}; for side 2 it is
    sum_l b_{jl} a_{li} = (B A)_{ji}.  Decoupling requires the value to be
    zero, independently of the step sizes and for both update rules.
    """
    if i == j:
        raise DimensionError("same-side condition applies to distinct coordinates")
    coordinate_node(spec, side, i)
    coordinate_node(spec, side, j)
    if side == 1:
        value = float((spec.A @ spec.B)[j, i])
    else:
        value = float((spec.B @ spec.A)[j, i])
    return abs(value) <= CONDITION_TOL, value


def cross_side_necessary_condition(
    spec: BilinearGameSpec, from_side: int, i: int, j: int
) -> tuple[bool, tuple[float, float]]:
    """Condition forced by decoupling a coordinate of one player from the other.

    ``from_side=1`` asks for coordinate (2, j) to be decoupled from
    disturbances at (1, i): the direct edge must vanish (b_ji = 0) and so
    must the aggregated two-hop weight sum_q b_{qi} sum_l a_{lq} b_{jl}
    = (B A B)_{ji}.  ``from_side=2`` is the mirrored pair: a_ji = 0 and
    (A B A)_{ji} = 0.  Both values are returned.
    """
    if from_side == 1:
        coordinate_node(spec, 1, i)
        coordinate_node(spec, 2, j)
        direct = float(spec.B[j, i])
        chained = float((spec.B @ spec.A @ spec.B)[j, i])
    elif from_side == 2:
        coordinate_node(spec, 2, i)
        coordinate_node(spec, 1, j)
        direct = float(spec.A[j, i])
        chained = float((spec.A @ spec.B @ spec.A)[j, i])
    else:
        raise DimensionError(f"from_side must be 1 or 2, got {from_side}")
    holds = abs(direct) <= CONDITION_TOL and abs(chained) <= CONDITION_TOL
    return holds, (direct, chained)
