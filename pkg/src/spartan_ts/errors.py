"""Exception hierarchy shared by all modules."""


class SpartanError(Exception):
    """Base class for errors raised by this package."""


class PermissibilityError(SpartanError, ValueError):
    """Parameters fall outside the positive-definite region."""


class NotPositiveDefiniteError(PermissibilityError):
    """A banded factorization broke down."""


class SizeError(SpartanError, ValueError):
    pass


class DegenerateInputError(SpartanError, ValueError):
    """Data do not carry enough information for the requested quantity."""


class InsufficientDataError(DegenerateInputError):
    pass


class UnsupportedParameterError(SpartanError, ValueError):
    pass


class ConditioningError(SpartanError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ModelError(SpartanError):
    """Covariance matrix could not be factorized, even after jitter."""


class ConvergenceError(SpartanError):
    """Optimizer stopped at the iteration cap.

    The best vertex found so far is kept on the exception so callers can
    still use it.
    """

    def __init__(self, message, x=None, fun=None, iterations=0):
        super().__init__(message)
        self.x = x
        self.fun = fun
        self.iterations = iterations


class SeriesFormatError(SpartanError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
