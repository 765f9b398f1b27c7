"""Exception hierarchy shared by every module."""


class ProxMHError(Exception):
    """Base class for all library errors."""


class DimensionError(ProxMHError, ValueError):
    pass


class NonFinitePotentialError(ProxMHError, ArithmeticError):
    pass


class UnsupportedOperationError(ProxMHError, NotImplementedError):
    pass


class OracleError(ProxMHError):
    """A rejection sampler gave up after ``attempts`` proposals."""

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts


class QuadratureError(ProxMHError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, achieved_tol=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_tol = achieved_tol


class NotLogConcaveError(OracleError):
    pass


class SamplerError(ProxMHError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DegenerateSeriesError(ProxMHError, ValueError):
    pass


class RangeCoverageError(ProxMHError, ValueError):
    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class ConfigError(ProxMHError):
    pass
