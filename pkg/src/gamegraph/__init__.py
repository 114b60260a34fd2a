"""Game graphs, disturbance decoupling, and gradient-play simulation."""

from .bilinear import (
    BilinearGameSpec,
    build_bilinear_graph,
    coordinate_node,
    cross_side_necessary_condition,
    same_side_necessary_condition,
)
from .core import (
    GameGraph,
    PlayerDims,
    QuadraticGame,
    StepSizes,
    StepSizeRule,
    build_game_graph,
    game_from_graph,
    game_jacobian,
    nash_equilibrium,
    uniform_step_size,
)
from .decoupling import (
    DecouplingQuery,
    DecouplingReport,
    PathSet,
    all_pairs_report,
    check_algebraic,
    check_paths,
    check_potential_symmetry,
    enumerate_paths,
)
from .errors import (
    ConfigError,
    DimensionError,
    DivergenceError,
    GameGraphError,
    NotPotentialGameError,
    PathEnumerationCapError,
    SingularGameError,
    StepSizeRuleError,
)
from .lq import (
    LiftedLQGame,
    LQGameSpec,
    decoupling_necessary_condition,
    decoupling_subspace_condition,
    lift,
    lq_cost,
    simulate_dynamics,
    trajectory_costs,
)
from .simulate import (
    DeviationReport,
    DisturbanceSignal,
    Trajectory,
    compare,
    magnitude_sweep,
    run,
)

__version__ = "0.1.0"
