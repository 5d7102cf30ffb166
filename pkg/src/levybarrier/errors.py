"""Exception and warning types raised by the pricing library."""


class LevyError(Exception):
    """Base class for all library errors."""


class ParameterError(LevyError, ValueError):
    pass


class DomainError(LevyError, ValueError):
    pass


class StripViolation(LevyError, ValueError):
    """A cumulant argument lies outside the analyticity strip of the model."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class UnsupportedVariant(LevyError, TypeError):
    pass


class QuadratureFailure(LevyError, RuntimeError):
    """Tolerance not met within the node budget; carries the best estimate."""

    def __init__(self, message, estimate=None, abs_err=None):
        super().__init__(message)
        self.estimate = estimate
        self.abs_err = abs_err


class InversionFailure(LevyError, RuntimeError):
    pass


class ConsistencyFailure(LevyError, RuntimeError):
    pass


class MomentDivergence(LevyError, ValueError):
    pass


class NoRootInBracket(LevyError, RuntimeError):
    def __init__(self, message, lo_value=None, hi_value=None):
        super().__init__(message)
        self.lo_value = lo_value
        self.hi_value = hi_value


class OptimizationFailure(LevyError, RuntimeError):
    pass


class ParseError(LevyError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class InsufficientData(LevyError, ValueError):
    pass


class EmptySample(LevyError, ValueError):
    pass


class BoundaryWarning(UserWarning):
    """Fitted skew sits within 1% of the tail parameter."""


class ApproximationRangeWarning(UserWarning):
    """Taylor approximation queried outside its configured radius."""
