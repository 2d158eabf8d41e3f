"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SingularMatrixError(ArithmeticError):
    """A matrix that must be inverted is singular or not positive definite."""


class JammingError(RuntimeError):
    """Fiber placement stalled before reaching the requested fraction."""


class SolverError(RuntimeError):
    """The finite-element system could not be solved to tolerance."""


class UndefinedCorrelationError(ArithmeticError):
    """Correlation requested for a sample with zero variance."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
