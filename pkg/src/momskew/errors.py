"""Exception hierarchy shared across the package."""


class MomskewError(Exception):
    """Base class for all package errors."""


class ConfigError(MomskewError, ValueError):
    """Invalid user configuration or argument."""


class InvalidPeriodError(ConfigError):
    """EMA period outside its admissible range."""


class PoleError(MomskewError, ValueError):
    """Coincident or near-coincident poles, or evaluation at a pole."""


class SPRZError(MomskewError, ValueError):
    """Filter does not have simple poles strictly inside the unit circle."""


class NumericalError(MomskewError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""


class QuadratureError(NumericalError):
    """Quadrature did not converge under node refinement."""


class DomainError(NumericalError):
    """Argument outside the domain where a quantity is finite."""


class DataError(MomskewError, ValueError):
    """Malformed or insufficient input data."""
