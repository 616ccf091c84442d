"""Exception types raised across the package."""


class NonIncreasingInterval(ValueError):
    """Time interval with tf <= t0."""


class GridTooCoarse(ValueError):
    """Fewer than two time steps requested."""


class ShapeMismatch(ValueError):
    """Array shapes inconsistent with the grid or problem dimensions."""


class ValidationError(ValueError):
    """Problem data violates a structural requirement."""


class ParseError(ValueError):
    """Problem-config document is malformed."""


class NonFiniteState(ArithmeticError):
    """Integration produced an overflow or NaN."""


class SingularShootingJacobian(RuntimeError):
    """Shooting Jacobian is numerically singular (loss of controllability
    on the grid)."""


class NoUsableJunction(RuntimeError):
    """No control junction with a usable costate denominator; the costate
    scale cannot be recovered."""


class UnsupportedActiveSet(RuntimeError):
    """More than one state constraint active at the same node; multiplier
    recovery supports one active state constraint at a time."""


class InfeasibleDiscretization(RuntimeError):
    """Discretized equality constraints are inconsistent with the bounds."""


class IterationLimit(RuntimeError):
    """Iterative solver reached its iteration cap before the tolerance."""
