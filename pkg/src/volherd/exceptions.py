"""Exception hierarchy shared by the simulator, estimators and CLI."""


class VolherdError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VolherdError, ValueError):
    """Invalid model or run parameters."""


class DomainError(VolherdError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class InsufficientDataError(VolherdError, ValueError):
    """Too few samples, bins or lags for a reliable estimate."""


class DegenerateSeriesError(VolherdError, ValueError):
    """A series or sample with zero spread (e.g. constant values)."""


class UnreliableFitError(VolherdError, ValueError):
    """A fit whose quality gate was not met."""
