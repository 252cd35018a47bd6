"""Exception hierarchy for velspace."""


class VelspaceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(VelspaceError, ValueError):
    """Input outside the domain of an operation (non-finite, superluminal, ...)."""


class DivergenceError(DomainError):
    """The requested quantity is infinite, e.g. a region reaching |beta| = 1."""


class NumericError(VelspaceError, ArithmeticError):
    """A numerical procedure failed (singular Jacobian, negative determinant, ...)."""


class SingularPointError(NumericError):
    """Evaluation at a point where a map or its Jacobian is singular."""
