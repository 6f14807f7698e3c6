"""Exception hierarchy shared across the package."""


class MWMError(Exception):
    """Base class for errors raised by mwm."""


class DomainError(MWMError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedOperationError(MWMError, TypeError):
    """The operation is not defined for this variant (e.g. pointwise delta spectrum)."""


class QuadratureError(MWMError, ArithmeticError):
    """Adaptive integration did not reach its tolerance.

    Carries the best estimate and its error bound.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NoEchoError(MWMError):
    """The diffraction order never rephases."""


class CutoffError(MWMError):
    """Fock-space truncation too small for the requested evolution."""


class ConfigError(MWMError):
    """Invalid run configuration."""


class FitError(MWMError):
    """Parameter estimation failed; ``best`` holds the best incumbent, if any."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
