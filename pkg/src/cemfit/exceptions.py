"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid distribution parameter or function argument (e.g. sigma <= 0, u outside (0, 1))."""


class DataError(ValueError):
    """A censored sample violates an invariant required for fitting."""


class DegenerateDataError(DataError):
    """An M-step produced a nonpositive variance estimate."""


class NumericRangeError(ArithmeticError):
    """A standardized censoring point lies so deep in the tail that the likelihood underflows."""


class TailUnderflowError(NumericRangeError):
    """Truncation point leaves too little tail mass for stable sampling."""


class NonConvergenceError(RuntimeError):
    """Direct likelihood maximization failed to converge from every start."""
