"""Exception hierarchy shared by every module in the package."""


class JamsenseError(Exception):
    """Base class for all package errors."""


class InvalidArgument(JamsenseError, ValueError):
    pass


class DegenerateInput(JamsenseError, ValueError):
    pass


class NotPositiveDefinite(JamsenseError, ValueError):
    pass


class DegenerateCovariance(JamsenseError, ValueError):
    pass


class InsufficientDimension(JamsenseError, ValueError):
    pass


class UnsupportedDimension(JamsenseError, ValueError):
    pass


class InsufficientTrials(JamsenseError, ValueError):
    pass


class IncompatibleDetector(JamsenseError, ValueError):
    """Detector cannot be used with the given scenario or calibration mode."""


class NumericalFailure(JamsenseError, ArithmeticError):
    """SVD, factorization or quadrature did not converge."""


class ConfigError(JamsenseError, ValueError):
    """Invalid run configuration; message carries line/field diagnostics."""
