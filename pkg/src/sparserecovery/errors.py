"""Exception hierarchy shared across the package."""


class SparseRecoveryError(Exception):
    """Base class for all package errors."""


class SizeError(SparseRecoveryError):
    """A construction would exceed a configured size cap."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class DomainError(SparseRecoveryError, ValueError):
    """A point lies outside the domain of a dictionary."""


class PoleError(DomainError):
    """A point hits a pole of the preconditioning envelope."""


class DimensionError(SparseRecoveryError, ValueError):
    """Operand shapes are inconsistent."""


class RankError(SparseRecoveryError):
    """A least-squares system became numerically singular."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DivergenceError(SparseRecoveryError):
    """An iterative method produced a non-finite iterate."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class UnsupportedError(SparseRecoveryError):
    """The requested quantity is not available for this input."""


class ConfigError(SparseRecoveryError, ValueError):
    """An experiment configuration is invalid."""


class BudgetError(SparseRecoveryError):
    """An enumeration would exceed its work budget."""
