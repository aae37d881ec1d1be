"""Exception hierarchy shared by all modules."""


class SingIntError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(SingIntError, ValueError):
    """Grid, shape or dimension mismatch."""


class ValidationError(SingIntError, ValueError):
    """An input object violates its domain invariants."""


class PreconditionError(SingIntError, ValueError):
    """An operation was called outside of its admissible regime."""


class EllipticityError(SingIntError, ArithmeticError):
    """The symbol (nearly) vanishes, so the operator is not invertible.

    ``frequency`` is the folded lattice index where the obstruction sits.
    """

    def __init__(self, message, frequency=None, minmod=None):
        super().__init__(message)
        self.frequency = frequency
        self.minmod = minmod


class ConvergenceError(SingIntError, RuntimeError):
    """An iteration stagnated or ran out of steps; ``history`` holds the residuals."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
