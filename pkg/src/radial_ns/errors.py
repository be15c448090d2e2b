"""Exception hierarchy shared by all modules."""


class RadialNSError(Exception):
    """Base class for every error raised by this package."""


class UsageError(RadialNSError, ValueError):
    """Invalid arguments, inconsistent configuration or bad parameter values."""


class DegenerateDensityError(RadialNSError, ValueError):
    """A density field reached zero or went negative where positivity is required."""


class NonFiniteError(RadialNSError, FloatingPointError):
    """A step produced NaN or infinite values."""


class QuadratureError(RadialNSError):
    """Adaptive quadrature ran out of its subdivision budget.

    The best available estimate is kept on ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(UsageError):
    """Configuration text could not be parsed or validated."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
