"""Exception hierarchy. Each class maps to one CLI exit code."""


class SrbZetaError(Exception):
    exit_code = 2


class HypothesisViolation(SrbZetaError):
    """The map leaves the class the toolkit is built for (non-repelling
    cycle, superstable critical orbit, positive Schwarzian, ...)."""

    exit_code = 1


class NumericalFailure(SrbZetaError):
    exit_code = 2


class ConfigError(SrbZetaError, ValueError):
    exit_code = 3


class ParameterWindowError(ConfigError):
    pass
