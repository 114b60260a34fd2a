"""Exception types shared across the package."""


class GameGraphError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GameGraphError, ValueError):
    """Raised when matrix/vector shapes are inconsistent with the player layout."""


class SingularGameError(GameGraphError):
    """Raised when the stacked first-order conditions are numerically singular.

    Carries the reciprocal condition number that triggered the rejection.
    """

    def __init__(self, rcond: float, threshold: float):
        self.rcond = rcond
        self.threshold = threshold
        super().__init__(
            f"game Jacobian is numerically singular: rcond={rcond:.3e} "
            f"below threshold {threshold:.1e}"
        )


class StepSizeRuleError(GameGraphError):
    """Raised when the uniform step-size rule is inapplicable (alpha <= 0)."""


class NotPotentialGameError(GameGraphError):
    """Raised when a potential-game premise (P_ij == P_ji^T) is violated."""


class PathEnumerationCapError(GameGraphError):
    """Raised when path enumeration would exceed the extension budget."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(
            f"path enumeration exceeds the {cap:,} extension cap; "
            "use the algebraic check instead"
        )


class DivergenceError(GameGraphError):
    """Raised when simulated dynamics produce non-finite iterates.

    The partial trajectory (all finite iterates) is retained on the exception.
    """

    def __init__(self, iteration: int, trajectory=None):
        self.iteration = iteration
        self.trajectory = trajectory
        super().__init__(f"dynamics diverged: non-finite values at iteration {iteration}")


class ConfigError(GameGraphError, ValueError):
    """Raised for malformed or schema-violating game documents."""
