"""Exception hierarchy shared by the solver stack and the command line."""


class GFDEError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(GFDEError, ValueError):
    """Invalid configuration or violated modelling assumption."""

    exit_code = 2


class DomainError(GFDEError, ValueError):
    """Argument outside the domain where an operation is defined."""

    exit_code = 3


class CapabilityError(GFDEError):
    """Operation not supported by the chosen backend or kernel."""

    exit_code = 4


class AdmissibilityError(ConfigurationError):
    """Coefficient paths violate the well-posedness assumptions."""


class UnsupportedKernelError(CapabilityError):
    pass


class ArgumentError(GFDEError, ValueError):
    """Inconsistent array shapes or mismatched companion arguments."""

    exit_code = 2


class MisuseError(GFDEError, ValueError):
    """An estimate check was called on a problem it does not apply to."""

    exit_code = 2


class ConvergenceError(GFDEError):
    """Fixed-point iteration did not reach tolerance."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
