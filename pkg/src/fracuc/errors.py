"""Exception hierarchy shared by the library and the command line."""


class FracUCError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(FracUCError, ValueError):
    pass


class DomainError(FracUCError, ValueError):
    """A mathematical precondition (stability, positivity) does not hold."""


class NumericalDegeneracyError(FracUCError, ArithmeticError):
    """A covariance matrix failed to factor at working precision.

    ``step`` is the 1-based time index where the factorization broke down,
    when known.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ResourceError(FracUCError, MemoryError):
    pass


class EstimationError(FracUCError, RuntimeError):
    """Every optimizer start failed. ``diagnostics`` holds one entry per start."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class DegenerateStateError(FracUCError, ValueError):
    pass


class NonPositiveIncrementError(FracUCError, ValueError):
    """A daily case increment is zero or negative, so log(Y_t) is undefined."""

    def __init__(self, message, date=None, index=None):
        super().__init__(message)
        self.date = date
        self.index = index


class InputError(FracUCError, ValueError):
    """Malformed input data. ``code`` distinguishes the failure class."""

    code = "input"

    def __init__(self, message, line=None, column=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.column = column


class DateGapError(InputError):
    code = "date-gap"


class NonMonotoneError(InputError):
    code = "non-monotone"


class MalformedHeaderError(InputError):
    code = "malformed-header"


class EmptyInputError(InputError):
    code = "empty-input"


class ConfigError(FracUCError, ValueError):
    pass
