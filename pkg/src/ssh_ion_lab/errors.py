"""Exception hierarchy.

Each family maps onto one CLI exit status: configuration problems exit with 2,
numerical failures with 3 and resource limits with 4.
"""


class SSHLabError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConfigError(SSHLabError, ValueError):
    exit_code = 2


class DomainError(SSHLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedConfigurationError(DomainError):
    pass


class DegenerateConfigurationError(DomainError):
    pass


class InfeasibleGeometryError(DomainError):
    pass


class NumericalFailureError(SSHLabError, ArithmeticError):
    pass


class InsufficientSupportError(NumericalFailureError):
    pass


class GaplessSpectrumError(NumericalFailureError):
    pass


class TruncationError(NumericalFailureError):
    pass


class FitDomainError(NumericalFailureError):
    pass


class DegeneratePerturbationError(NumericalFailureError):
    pass


class StepSizeError(NumericalFailureError):
    pass


class ResourceLimitError(SSHLabError, MemoryError):
    exit_code = 4
