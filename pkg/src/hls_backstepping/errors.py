"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """Raised when physical or numerical parameters are out of range."""


class DomainError(ValueError):
    """Raised when a kernel is evaluated outside the triangle 0 <= y <= x <= L."""


class RegimeError(ValueError):
    """Raised when a formula is used in the wrong sign regime of alpha^2 + 3*beta*delta."""


class NonConvergence(RuntimeError):
    """Raised when a fixed-point iteration exhausts its iteration budget."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SingularSystem(RuntimeError):
    """Raised when a linear system is numerically singular."""


class RateWarning(UserWarning):
    """Emitted when one of the closed-form decay rates is not positive."""


class CompatibilityWarning(UserWarning):
    """Emitted when initial data violate the discrete boundary conditions."""
