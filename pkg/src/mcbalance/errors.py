"""Exception types shared across the package."""


class McbalanceError(Exception):
    """Base class for package errors."""


class OutOfDomainError(McbalanceError, ValueError):
    """A coordinate or parameter lies outside the declared domain."""


class EmptyTraceError(McbalanceError, ValueError):
    """No draws remain after burn-in removal."""


class ShapeError(McbalanceError, ValueError):
    """Dimension mismatch between related objects."""


class NoUniqueStationaryError(McbalanceError, ValueError):
    """The stationary-distribution solve is singular or defective."""


class DegenerateVarianceError(McbalanceError, ValueError):
    """A series has (numerically) zero variance."""


class ZeroProbabilityStateError(McbalanceError, ValueError):
    """An operation requiring pi_i > 0 met a zero-probability state."""


class ReversibilityError(McbalanceError, ValueError):
    """A transition matrix is not reversible w.r.t. the supplied distribution."""


class NumericalConsistencyError(McbalanceError, ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""


class DegenerateNullError(McbalanceError, ValueError):
    """The null approximation has non-positive variance."""


class NotConvergedError(McbalanceError, RuntimeError):
    """A stopping criterion was never met; .side identifies which run."""

    def __init__(self, message: str, side: str | None = None):
        super().__init__(message)
        self.side = side


class ConfigError(McbalanceError, ValueError):
    """Invalid run configuration; message is anchored to the offending key."""
