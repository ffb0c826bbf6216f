"""Exception and warning types shared across the package."""

from __future__ import annotations


class KVGreenError(Exception):
    """Base class for all package errors."""


class DomainError(KVGreenError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class PoleError(DomainError):
    """A frequency-domain kernel was evaluated on one of its poles."""


class ConvergenceError(KVGreenError, RuntimeError):
    """A quadrature or iteration did not reach its tolerance.

    The best available estimate is kept on the exception so callers can
    decide whether it is usable anyway.
    """

    def __init__(self, message: str, estimate: float | None = None, error: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class TruncationError(KVGreenError, RuntimeError):
    """A decay envelope never dropped below the truncation threshold."""


class ConfigurationError(KVGreenError, ValueError):
    """Invalid solver or run configuration (grid, CFL, config file)."""


class TruncationWarning(UserWarning):
    """A series was cut at its mode cap before the tail fell below tolerance."""


class CompatibilityWarning(UserWarning):
    """Initial data and boundary data disagree at a corner of the strip."""
