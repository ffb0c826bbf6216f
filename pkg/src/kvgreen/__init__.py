"""Green functions of the viscous wave operator ``eps u_xxt + c^2 u_xx - u_tt`` on a strip."""

from .errors import (
    CompatibilityWarning,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    KVGreenError,
    PoleError,
    TruncationError,
    TruncationWarning,
)
from .modal import GreenPoint, MediumParams, Mode, SeriesPolicy
from .specfun import DEFAULT_QUADRATURE, QuadratureSpec
from .transform import TimeSignal, WindowSpec, kv_transform

__all__ = [
    "CompatibilityWarning",
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "KVGreenError",
    "PoleError",
    "TruncationError",
    "TruncationWarning",
    "GreenPoint",
    "MediumParams",
    "Mode",
    "SeriesPolicy",
    "DEFAULT_QUADRATURE",
    "QuadratureSpec",
    "TimeSignal",
    "WindowSpec",
    "kv_transform",
]

__version__ = "0.1.0"
