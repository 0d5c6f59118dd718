"""Semantic exception hierarchy shared by all modules."""


class EigendetectError(Exception):
    """Base class for all library errors."""


class DomainError(EigendetectError, ValueError):
    """An argument lies outside the operation's admissible domain."""


class NotIdentifiableError(DomainError):
    """Spike eigenvalue at or below the phase-transition point.

    The largest sample eigenvalue then fluctuates exactly as in the
    noise-only case, so no separate signal-present limiting law exists;
    callers should fall back to the noise-only distribution.
    """


class NumericError(EigendetectError, ArithmeticError):
    """A numerical procedure (ODE solve, quadrature, root find) failed
    to reach its required accuracy."""
