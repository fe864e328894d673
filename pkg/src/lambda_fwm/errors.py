"""Exception hierarchy shared by the solvers and the command-line front end."""


class FWMError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(FWMError, ValueError):
    """A physical parameter is outside its allowed range."""


class SingularResponse(FWMError, ArithmeticError):
    """The determinant of the atomic response vanishes on the integration path."""

    def __init__(self, message, eta=None):
        super().__init__(message)
        self.eta = eta


class GridTooCoarse(FWMError, ValueError):
    pass


class PhaseAliasing(FWMError, ValueError):
    """Propagation phase varies too fast between neighbouring frequency samples."""

    def __init__(self, message, max_increment=None):
        super().__init__(message)
        self.max_increment = max_increment


class GainOverflow(FWMError, OverflowError):
    """A propagation mode grows so fast that its exponential overflows."""


class ZeroProbe(FWMError, ValueError):
    pass


class ZeroCoupling(FWMError, ValueError):
    pass


class DegenerateDetuning(FWMError, ValueError):
    """The detuning combination that sets the phase-mismatch rate vanishes."""


class RegimeViolation(FWMError, ValueError):
    """Parameters fall outside the validity region of a limiting formula.

    ``failures`` holds ``(condition, satisfied, margin)`` triples for every
    condition that was not met.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class StepTooLarge(FWMError, RuntimeError):
    pass


class NotConverged(FWMError, RuntimeError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ConfigError(FWMError, ValueError):
    """Configuration failed schema validation; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
