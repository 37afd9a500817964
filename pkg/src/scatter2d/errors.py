"""Exception hierarchy shared across the package."""


class ScatterError(Exception):
    """Base class for all scatter2d errors."""


class DomainError(ScatterError, ValueError):
    """An argument lies outside the supported domain of a function."""


class ConvergenceError(ScatterError, ArithmeticError):
    """An iterative numerical scheme failed to converge."""


class ConfigurationError(ScatterError, ValueError):
    """Inconsistent or invalid problem/experiment configuration."""


class SolverError(ScatterError, ArithmeticError):
    """A linear solve failed; carries the condition estimate if known."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
