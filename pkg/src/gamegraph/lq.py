"""Finite-horizon LQ dynamic games lifted to one-shot quadratic games.

Each player i picks an open-loop input sequence U_i = (u_i^0, ..., u_i^{T-1})
driving the shared linear state z^{t+1} = A z^t + sum_j B_j u_j^t from z^0,
and pays quadratic state costs over z^0..z^T plus control costs.  Stacking
states as Z = sum_j G_j U_j + H z^0 turns the dynamic game into a quadratic
game over the U_i, whose game graph the decoupling machinery consumes
directly.  The module also evaluates the necessary condition that decoupling
of player j from player i imposes on (A, B_i, B_j, Q_j): the product of
j's observability-style stack, Q_j, and i's controllability-style stack
must vanish, equivalently (for positive definite Q_j and long enough
horizon) a controllable/unobservable subspace containment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import PlayerDims, QuadraticGame
from .errors import DimensionError

__all__ = [
    "LQGameSpec",
    "LiftedLQGame",
    "lift",
    "simulate_dynamics",
    "trajectory_costs",
    "lq_cost",
    "decoupling_necessary_condition",
    "decoupling_subspace_condition",
]

# Singular values below this fraction of the largest are treated as zero in
# rank-revealing subspace computations.
RANK_TOL = 1e-9
# Eigenvalue floor for positive-definiteness checks.
PD_FLOOR = 1e-12


class LQGameSpec:
    """N-player finite-horizon LQ game data.

    ``horizon`` is the number of control steps T: states z^0..z^T are
    penalized through Q_i, controls u^0..u^{T-1} through R_i.  Optional
    per-player targets c_i shift the state cost to (z - c_i)^T Q_i (z - c_i).
    """

    def __init__(
        self,
        A,
        B: Sequence,
        Q: Sequence,
        R: Sequence,
        horizon: int,
        z0,
        targets: Sequence | None = None,
    ):
        self.A = np.asarray(A, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise DimensionError(f"A must be square, got shape {self.A.shape}")
        m = self.A.shape[0]
        self.m = m
        if len(B) == 0:
            raise DimensionError("at least one player (one B matrix) is required")
        self.B = []
        for i, Bi in enumerate(B):
            Bi = np.asarray(Bi, dtype=float)
            if Bi.ndim != 2 or Bi.shape[0] != m:
                raise DimensionError(f"B[{i}] must have {m} rows, got shape {Bi.shape}")
            self.B.append(Bi)
        N = len(self.B)
        if len(Q) != N or len(R) != N:
            raise DimensionError(f"expected {N} Q and R matrices, got {len(Q)} and {len(R)}")
        self.Q = []
        for i, Qi in enumerate(Q):
            Qi = np.asarray(Qi, dtype=float)
            if Qi.shape != (m, m):
                raise DimensionError(f"Q[{i}] must be {m}x{m}, got shape {Qi.shape}")
            if not np.allclose(Qi, Qi.T, rtol=0.0, atol=1e-12 * max(1.0, abs(Qi).max())):
                raise DimensionError(f"Q[{i}] must be symmetric")
            self.Q.append(0.5 * (Qi + Qi.T))
        self.R = []
        for i, Ri in enumerate(R):
            Ri = np.asarray(Ri, dtype=float)
            mi = self.B[i].shape[1]
            if Ri.shape != (mi, mi):
                raise DimensionError(f"R[{i}] must be {mi}x{mi}, got shape {Ri.shape}")
            try:
                np.linalg.cholesky(0.5 * (Ri + Ri.T))
            except np.linalg.LinAlgError:
                raise DimensionError(f"R[{i}] must be symmetric positive definite") from None
            self.R.append(Ri)
        self.horizon = int(horizon)
        if self.horizon < 1:
            raise DimensionError(f"horizon must be >= 1, got {horizon}")
        self.z0 = np.asarray(z0, dtype=float).reshape(-1)
        if self.z0.shape != (m,):
            raise DimensionError(f"z0 must have length {m}")
        if targets is None:
            targets = [np.zeros(m)] * N
        if len(targets) != N:
            raise DimensionError(f"expected {N} targets, got {len(targets)}")
        self.targets = []
        for i, ci in enumerate(targets):
            ci = np.asarray(ci, dtype=float).reshape(-1)
            if ci.shape != (m,):
                raise DimensionError(f"target[{i}] must have length {m}")
            self.targets.append(ci)

    @property
    def n_players(self) -> int:
        return len(self.B)

    def input_dims(self) -> list[int]:
        """Lifted action dimension T * m_i per player."""
        return [self.horizon * Bi.shape[1] for Bi in self.B]


@dataclass(frozen=True)
class LiftedLQGame:
    """Stacked matrices of the one-shot reformulation plus the derived game.

    G[i] maps U_i to the stacked state response (first block row zero, block
    row t holding A^{t-1-s} B_i for s < t); H is the free response
    [I; A; ...; A^T].  The derived quadratic game has
    P_i = G_i^T Qbar_i G_i + Rbar_i, P_ij = G_i^T Qbar_i G_j and
    r_i = G_i^T Qbar_i (H z0 - C_i).
    """

    spec: LQGameSpec = field(repr=False)
    G: tuple[np.ndarray, ...] = field(repr=False)
    H: np.ndarray = field(repr=False)
    Qbar: tuple[np.ndarray, ...] = field(repr=False)
    Rbar: tuple[np.ndarray, ...] = field(repr=False)
    game: QuadraticGame = field(repr=False)


def _state_powers(A: np.ndarray, up_to: int) -> list[np.ndarray]:
    powers = [np.eye(A.shape[0])]
    for _ in range(up_to):
        powers.append(A @ powers[-1])
    return powers


def lift(spec: LQGameSpec) -> LiftedLQGame:
    """Build the stacked matrices and the equivalent one-shot quadratic game."""
    T = spec.horizon
    m = spec.m
    powers = _state_powers(spec.A, T)
    H = np.vstack(powers)
    G = []
    for Bi in spec.B:
        mi = Bi.shape[1]
        Gi = np.zeros(((T + 1) * m, T * mi))
        for t in range(1, T + 1):
            for s in range(t):
                Gi[t * m : (t + 1) * m, s * mi : (s + 1) * mi] = powers[t - 1 - s] @ Bi
        G.append(Gi)
    Qbar = [np.kron(np.eye(T + 1), Qi) for Qi in spec.Q]
    Rbar = [np.kron(np.eye(T), Ri) for Ri in spec.R]

    N = spec.n_players
    dims = PlayerDims(spec.input_dims())
    Hz0 = H @ spec.z0
    P = []
    cross = {}
    r = []
    for i in range(N):
        GiTQ = G[i].T @ Qbar[i]
        P.append(GiTQ @ G[i] + Rbar[i])
        Ci = np.tile(spec.targets[i], T + 1)
        r.append(GiTQ @ (Hz0 - Ci))
        for j in range(N):
            if j != i:
                cross[(i, j)] = GiTQ @ G[j]
    game = QuadraticGame(dims, P, cross, r)
    return LiftedLQGame(
        spec=spec,
        G=tuple(G),
        H=H,
        Qbar=tuple(Qbar),
        Rbar=tuple(Rbar),
        game=game,
    )


def split_joint_input(spec: LQGameSpec, U: np.ndarray) -> list[np.ndarray]:
    """Split a stacked joint input into per-player sequences U_i."""
    U = np.asarray(U, dtype=float).reshape(-1)
    dims = spec.input_dims()
    if U.shape != (sum(dims),):
        raise DimensionError(f"joint input must have length {sum(dims)}")
    out = []
    off = 0
    for d in dims:
        out.append(U[off : off + d])
        off += d
    return out


def simulate_dynamics(spec: LQGameSpec, U: Sequence[np.ndarray]) -> np.ndarray:
    """Roll the state recursion forward; returns states stacked as (T+1, m)."""
    T = spec.horizon
    Z = np.zeros((T + 1, spec.m))
    Z[0] = spec.z0
    for t in range(T):
        z_next = spec.A @ Z[t]
        for Bi, Ui in zip(spec.B, U):
            ui = np.asarray(Ui).reshape(T, Bi.shape[1])[t]
            z_next = z_next + Bi @ ui
        Z[t + 1] = z_next
    return Z


def lq_cost(spec: LQGameSpec, U: Sequence[np.ndarray], i: int) -> float:
    """Player i's raw cost evaluated through the simulated state recursion.

    Deliberately bypasses the lifted matrices so it can serve as an
    independent reference for the derived quadratic game.
    """
    Z = simulate_dynamics(spec, U)
    ci = spec.targets[i]
    state = sum(float((z - ci) @ spec.Q[i] @ (z - ci)) for z in Z)
    Ui = np.asarray(U[i]).reshape(spec.horizon, spec.B[i].shape[1])
    control = sum(float(u @ spec.R[i] @ u) for u in Ui)
    return 0.5 * (state + control)


def trajectory_costs(spec: LQGameSpec, joint_inputs: np.ndarray, i: int) -> np.ndarray:
    """Player i's raw cost at each joint lifted input of a learning trajectory.

    The one-shot quadratic form drops terms that are constant in the player's
    own action but still move with the others' inputs, so a disturbance can
    shift this cost even when the player's action sequence is untouched.
    """
    return np.array(
        [lq_cost(spec, split_joint_input(spec, U), i) for U in np.atleast_2d(joint_inputs)]
    )


def decoupling_necessary_condition(
    spec: LQGameSpec, i: int, j: int, tolerance: float = 1e-9
) -> tuple[bool, float]:
    """Whether the stacked product O_j Q_j C_i vanishes (necessary for decoupling).

    O_j stacks B_j^T (A^T)^p for p = 0..T-1 and C_i lays out A^q B_i for
    q = 0..T-1.  If player j is decoupled from disturbances at player i, this
    product must be exactly zero; a nonzero product certifies coupling (the
    graph then has a direct edge i -> j).
    """
    if i == j:
        raise DimensionError("necessary condition applies to distinct players")
    T = spec.horizon
    powers = _state_powers(spec.A, T - 1)
    O = np.vstack([spec.B[j].T @ Ap.T for Ap in powers])
    C = np.hstack([Ap @ spec.B[i] for Ap in powers])
    M = O @ spec.Q[j] @ C
    residual = float(np.linalg.norm(M))
    scale = max(
        1.0,
        float(np.linalg.norm(O) * np.linalg.norm(spec.Q[j]) * np.linalg.norm(C)),
    )
    return residual <= tolerance * scale, residual


def _psd_sqrt_and_inv(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(0.5 * (Q + Q.T))
    if evals.min() < PD_FLOOR:
        raise DimensionError(
            f"matrix is not positive definite (min eigenvalue {evals.min():.3e})"
        )
    root = np.sqrt(evals)
    return (evecs * root) @ evecs.T, (evecs / root) @ evecs.T


def _range_basis(M: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space, rank-revealed by SVD."""
    if M.size == 0 or not np.any(M):
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    return U[:, :rank]


def decoupling_subspace_condition(spec: LQGameSpec, i: int, j: int) -> bool:
    """Subspace form of the necessary condition, for Q_j > 0 and T >= m.

    After the change of coordinates At = Q_j^{1/2} A Q_j^{-1/2},
    Bt_i = Q_j^{1/2} B_i, Bt_j = Q_j^{1/2} B_j, checks that the controllable
    subspace of (At, Bt_i) lies inside the unobservable subspace of
    (Bt_j^T, At^T).
    """
    if i == j:
        raise DimensionError("subspace condition applies to distinct players")
    m = spec.m
    if spec.horizon < m:
        raise DimensionError(
            f"subspace condition requires horizon >= state dimension ({m}), "
            f"got {spec.horizon}"
        )
    Qh, Qih = _psd_sqrt_and_inv(spec.Q[j])
    At = Qh @ spec.A @ Qih
    Bti = Qh @ spec.B[i]
    Btj = Qh @ spec.B[j]
    powers = _state_powers(At, m - 1)
    ctrb = np.hstack([Ap @ Bti for Ap in powers])
    obsv = np.vstack([Btj.T @ Ap.T for Ap in powers])
    basis = _range_basis(ctrb)
    if basis.shape[1] == 0:
        return True
    if not np.any(obsv):
        return True
    scale = float(np.linalg.norm(obsv, 2))
    return float(np.linalg.norm(obsv @ basis, 2)) <= RANK_TOL * max(1.0, scale)
