"""End-to-end acceptance checks.

Each test covers one release criterion at its stated tolerance and prints a
one-line PASS record (visible with ``pytest -s`` or ``-rP``).
"""

import time

import numpy as np
import pytest

from gamegraph import (
    DecouplingQuery,
    DisturbanceSignal,
    LQGameSpec,
    StepSizes,
    build_bilinear_graph,
    build_game_graph,
    check_algebraic,
    check_paths,
    check_potential_symmetry,
    compare,
    coordinate_node,
    cross_side_necessary_condition,
    decoupling_necessary_condition,
    game_jacobian,
    lift,
    lq_cost,
    same_side_necessary_condition,
    trajectory_costs,
    uniform_step_size,
)
from gamegraph.bilinear import BilinearGameSpec
from conftest import (
    HORIZON_GRAM,
    TUG_PULLS,
    diamond_graph,
    random_coupled_diamond,
    random_decoupled_diamond,
    random_potential_game,
    random_quadratic_game,
    random_step_sizes,
    tug_of_war_spec,
)

TOLERANCE = 1e-9
TRAJECTORY_TOL = 1e-8


def _report(name: str, detail: str):
    print(f"[acceptance] PASS {name}: {detail}")


def test_criterion_1_oracle_equivalence_on_random_games():
    """Algebraic and path-enumeration verdicts agree on 200 seeded games."""
    rng = np.random.default_rng(20240501)
    start = time.perf_counter()
    pairs_checked = 0
    for _ in range(200):
        game = random_quadratic_game(rng, symmetric_own=False, zero_prob=0.3)
        graph = build_game_graph(game, random_step_sizes(rng, game.n_players))
        N = game.n_players
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                query = DecouplingQuery(i, j, TOLERANCE)
                assert (
                    check_algebraic(graph, query).verdict
                    == check_paths(graph, query).verdict
                )
                pairs_checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"oracle equivalence sweep took {elapsed:.1f}s"
    _report("criterion 1", f"{pairs_checked} ordered pairs agreed in {elapsed:.2f}s")


def test_criterion_2_diamond_weight_sweep():
    """Cancelling weights decouple the diamond; perturbing them breaks it."""
    values = (-1.0, -0.5, 0.5, 1.0)
    loops = (0.4, 0.5, 0.5, 0.6)  # middle self loops equal
    cases = 0
    for t1 in values:
        for b1 in values:
            t2 = 1.0
            b2 = -t1 * t2 / b1
            graph = diamond_graph(t1, t2, b1, b2, loops)
            report = check_algebraic(graph, DecouplingQuery(0, 3, TOLERANCE))
            assert report.verdict, (t1, b1)
            perturbed = diamond_graph(t1, t2, b1, b2 + 0.1, loops)
            flipped = check_algebraic(perturbed, DecouplingQuery(0, 3, TOLERANCE))
            assert not flipped.verdict, (t1, b1)
            cases += 1
    _report("criterion 2", f"{cases} weight combinations: decoupled, and flipped by +0.1")


def test_criterion_3_target_steering_golden():
    """Structure, verdicts, simulation, and cost observation on the golden game."""
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    spec = tug_of_war_spec(z0=rng.uniform(-1.0, 1.0, size=2))
    lifted = lift(spec)

    # (a) every cross block is the horizon Gram profile scaled by the pulls'
    # inner product
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            dot = (TUG_PULLS[i].T @ TUG_PULLS[j]).item()
            expected = np.kron(HORIZON_GRAM, [[dot]])
            assert np.abs(lifted.game.cross_block(i, j) - expected).max() <= 1e-12

    # (b) algebraic verdicts for the orthogonal pair, both directions
    rule = uniform_step_size(game_jacobian(lifted.game))
    graph = build_game_graph(lifted.game, StepSizes.uniform(rule.gamma, 4))
    assert check_algebraic(graph, DecouplingQuery(0, 3, TOLERANCE)).verdict
    assert check_algebraic(graph, DecouplingQuery(3, 0, TOLERANCE)).verdict

    # (c) 100-step simulation with a bounded random disturbance at player 1
    signal = DisturbanceSignal.seeded_uniform(0, seed=42, bound=50.0)
    report = compare(graph, np.zeros(graph.n), 100, signal)
    assert report.rel_deviation[3] <= TRAJECTORY_TOL
    assert report.rel_deviation[0] > 1e-3

    # (d) player 4's rolled-out cost still moves: actions are decoupled,
    # costs are not
    from gamegraph import run

    clean = run(graph, np.zeros(graph.n), 100)
    disturbed = run(graph, np.zeros(graph.n), 100, signal)
    clean_cost = trajectory_costs(spec, clean.iterates, 3)
    disturbed_cost = trajectory_costs(spec, disturbed.iterates, 3)
    cost_gap = np.abs(clean_cost - disturbed_cost).max()
    assert cost_gap > 1e-6 * (1.0 + np.abs(clean_cost).max())

    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"golden test took {elapsed:.1f}s"
    _report(
        "criterion 3",
        f"structure exact, pair decoupled both ways, player-4 action dev "
        f"{report.rel_deviation[3]:.1e}, cost gap {cost_gap:.2f}, {elapsed:.2f}s",
    )


def _aligned_impulse(graph, report):
    """Unit impulse along the strongest input direction of the first bad block."""
    k = report.first_failure
    Wk = np.linalg.matrix_power(graph.W, k)
    block = Wk[graph.dims.block(report.query.target), graph.dims.block(report.query.source)]
    _, _, vt = np.linalg.svd(block)
    return vt[0]


def test_criterion_4_verdicts_match_trajectories():
    """Decoupled instances keep the target clean; coupled ones provably leak."""
    rng = np.random.default_rng(777)
    x0 = np.full(4, 0.2)
    for idx in range(100):
        graph = random_decoupled_diamond(rng)
        assert check_algebraic(graph, DecouplingQuery(0, 3, TOLERANCE)).verdict, idx
        impulse = compare(graph, x0, 100, DisturbanceSignal.impulse(0, [1.0]))
        assert impulse.rel_deviation[3] <= TRAJECTORY_TOL, idx
        random_sig = DisturbanceSignal.seeded_uniform(0, seed=(777, idx), bound=10.0)
        randomized = compare(graph, x0, 100, random_sig)
        assert randomized.rel_deviation[3] <= TRAJECTORY_TOL, idx
    for idx in range(100):
        graph = random_coupled_diamond(rng)
        report = check_algebraic(graph, DecouplingQuery(0, 3, TOLERANCE))
        assert not report.verdict, idx
        signal = DisturbanceSignal.impulse(0, _aligned_impulse(graph, report))
        leaked = compare(graph, x0, 100, signal)
        assert leaked.max_deviation[3] > TRAJECTORY_TOL, idx
    _report("criterion 4", "100 decoupled instances clean, 100 coupled instances leak")


def test_criterion_5_potential_game_symmetry():
    """Forward and backward verdicts agree on potential games."""
    rng = np.random.default_rng(2025)
    true_verdicts = 0
    pairs = 0
    for idx in range(50):
        zero_prob = 0.9 if idx % 5 == 0 else 0.3  # mix in sparse games
        game = random_potential_game(rng, zero_prob=zero_prob)
        gamma = random_step_sizes(rng, game.n_players)
        for record in check_potential_symmetry(game, gamma, TOLERANCE):
            assert record.forward == record.backward, (idx, record.pair)
            pairs += 1
            if record.forward:
                true_verdicts += 1
    assert true_verdicts > 0  # the agreement is not vacuous
    _report(
        "criterion 5",
        f"{pairs} unordered pairs symmetric ({true_verdicts} decoupled)",
    )


def _random_lq_spec(rng):
    N = int(rng.integers(2, 4))
    m = int(rng.integers(1, 3))
    T = int(rng.integers(2, 4))
    A = rng.uniform(-1, 1, size=(m, m))
    B = [rng.uniform(-1, 1, size=(m, 1)) for _ in range(N)]
    Q = []
    for _ in range(N):
        M = rng.uniform(-1, 1, size=(m, m))
        Q.append(M @ M.T)
    R = [np.array([[rng.uniform(0.5, 2.0)]]) for _ in range(N)]
    return LQGameSpec(A, B, Q, R, T, rng.uniform(-1, 1, size=m))


def test_criterion_6_necessary_conditions():
    """Violated payoff/stack conditions certify coupling; golden pair is exact."""
    rng = np.random.default_rng(606)

    lq_violations = 0
    for _ in range(100):
        spec = _random_lq_spec(rng)
        i, j = rng.choice(spec.n_players, size=2, replace=False)
        i, j = int(i), int(j)
        holds, _ = decoupling_necessary_condition(spec, i, j)
        if holds:
            continue
        lq_violations += 1
        lifted = lift(spec)
        graph = build_game_graph(
            lifted.game, StepSizes.uniform(0.01, spec.n_players)
        )
        assert not check_algebraic(graph, DecouplingQuery(i, j, TOLERANCE)).verdict

    bilinear_violations = 0
    for _ in range(100):
        n1, n2 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        spec = BilinearGameSpec(
            rng.uniform(-1, 1, size=(n1, n2)),
            rng.uniform(-1, 1, size=(n2, n1)),
            rng.uniform(0.05, 0.3),
            rng.uniform(0.05, 0.3),
            "alternating" if rng.random() < 0.5 else "simultaneous",
        )
        graph = build_bilinear_graph(spec)
        style = rng.integers(4)
        if style == 0:
            i, j = (int(v) for v in rng.choice(n1, size=2, replace=False))
            holds, _ = same_side_necessary_condition(spec, 1, i, j)
            src, dst = coordinate_node(spec, 1, i), coordinate_node(spec, 1, j)
        elif style == 1:
            i, j = (int(v) for v in rng.choice(n2, size=2, replace=False))
            holds, _ = same_side_necessary_condition(spec, 2, i, j)
            src, dst = coordinate_node(spec, 2, i), coordinate_node(spec, 2, j)
        elif style == 2:
            i, j = int(rng.integers(n1)), int(rng.integers(n2))
            holds, _ = cross_side_necessary_condition(spec, 1, i, j)
            src, dst = coordinate_node(spec, 1, i), coordinate_node(spec, 2, j)
        else:
            i, j = int(rng.integers(n2)), int(rng.integers(n1))
            holds, _ = cross_side_necessary_condition(spec, 2, i, j)
            src, dst = coordinate_node(spec, 2, i), coordinate_node(spec, 1, j)
        if holds:
            continue
        bilinear_violations += 1
        assert not check_algebraic(graph, DecouplingQuery(src, dst, TOLERANCE)).verdict

    assert lq_violations >= 70
    assert bilinear_violations >= 70

    holds, residual = decoupling_necessary_condition(tug_of_war_spec(), 0, 3)
    assert holds
    assert residual <= 1e-12
    _report(
        "criterion 6",
        f"{lq_violations} dynamic-game and {bilinear_violations} bilinear "
        f"violations all certified coupling; golden pair residual {residual:.1e}",
    )


def test_criterion_7_gradient_against_finite_differences():
    """Lifted analytic gradients match central differences of the raw cost."""
    rng = np.random.default_rng(707)
    worst = 0.0
    for _ in range(20):
        spec = _random_lq_spec(rng)
        lifted = lift(spec)
        U = [rng.uniform(-1, 1, size=G.shape[1]) for G in lifted.G]
        joint = np.concatenate(U)
        i = int(rng.integers(spec.n_players))
        analytic = lifted.game.gradient(i, joint)
        h = 1e-4
        numeric = np.zeros_like(analytic)
        for c in range(len(numeric)):
            up = [u.copy() for u in U]
            down = [u.copy() for u in U]
            up[i][c] += h
            down[i][c] -= h
            numeric[c] = (lq_cost(spec, up, i) - lq_cost(spec, down, i)) / (2 * h)
        err = np.linalg.norm(analytic - numeric) / max(1.0, np.linalg.norm(analytic))
        worst = max(worst, err)
        assert err <= 1e-6
    _report("criterion 7", f"20 draws, worst relative gradient error {worst:.1e}")


def test_criterion_8_power_truncation_beyond_cutoff():
    """Blocks that vanish below the dimension cutoff stay zero up to 2n."""
    rng = np.random.default_rng(777)  # same family as criterion 4
    worst = 0.0
    for idx in range(100):
        graph = random_decoupled_diamond(rng)
        n = graph.n
        Wk = np.linalg.matrix_power(graph.W, n)
        for k in range(n, 2 * n + 1):
            block = Wk[graph.dims.block(3), graph.dims.block(0)]
            scale = max(1.0, np.linalg.norm(Wk))
            ratio = np.linalg.norm(block) / scale
            worst = max(worst, ratio)
            assert ratio <= TOLERANCE, (idx, k)
            Wk = Wk @ graph.W
    _report("criterion 8", f"powers n..2n stayed zero, worst ratio {worst:.1e}")
