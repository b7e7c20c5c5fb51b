"""Periodic-orbit zeta functions, Ulam transfer operators and SRB response for unimodal maps."""

from .errors import (
    ConfigError,
    HypothesisViolation,
    NumericalFailure,
    ParameterWindowError,
    SrbZetaError,
)
from .unimodal import (
    AnalyticMotion,
    ConjugatedFamily,
    MapDescriptor,
    Observable,
    PolynomialFamily,
    chebyshev,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticMotion",
    "ConfigError",
    "ConjugatedFamily",
    "HypothesisViolation",
    "MapDescriptor",
    "NumericalFailure",
    "Observable",
    "ParameterWindowError",
    "PolynomialFamily",
    "SrbZetaError",
    "chebyshev",
    "__version__",
]
