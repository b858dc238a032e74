"""Exception hierarchy shared by every pairtheta module."""


class PairThetaError(Exception):
    """Base class for all errors raised by pairtheta."""


class DomainError(PairThetaError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientDataError(PairThetaError, ValueError):
    """The data (usually a spectrum cutoff) cannot support the request."""


class ResourceBudgetError(PairThetaError, MemoryError):
    """A predicted enumeration, panel count or key range exceeds its budget."""

    def __init__(self, message: str, predicted: float = 0.0, budget: float = 0.0):
        super().__init__(message)
        self.predicted = predicted
        self.budget = budget


class CacheFormatError(PairThetaError, ValueError):
    """A spectrum cache file has the wrong magic header or version."""


class ConfigError(PairThetaError, ValueError):
    """A run configuration could not be parsed; carries the position."""

    def __init__(self, message: str, path: str = "<string>", line: int = 0):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
