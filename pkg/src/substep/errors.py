"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: :class:`DomainError` -> 1,
:class:`NumericalError` (and subclasses) -> 2.
"""


class SubstepError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SubstepError, ValueError):
    """Input outside the documented domain of an operation."""


class NumericalError(SubstepError, ArithmeticError):
    """A numerical procedure failed (singular matrix, no bracket, ...)."""


class NonConvergenceError(NumericalError):
    """Newton iteration ran out of iterations."""

    def __init__(self, message, residual_norm=float("nan"), iterations=0):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class DivergenceError(NumericalError):
    """Non-finite values appeared in a state or residual."""


class UnsupportedRegimeError(DomainError):
    """Requested a closed form outside the regime where it is defined."""


class ProbeDegenerateError(NumericalError):
    """Errors too small to recover an order from; use a larger step."""
