"""Exception types shared across the package."""


class FacarError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(FacarError, ValueError):
    """An argument is outside its valid range or inconsistent with the others."""


class NumericError(FacarError, ArithmeticError):
    """A numerical precondition failed (non-PSD matrix, singular system, ...)."""


class FormatError(FacarError, ValueError):
    """A data file could not be parsed; the message carries row/column context."""


class DegenerateVariableError(FacarError, ValueError):
    """A variable has zero variance where a positive one is required."""


class SingularNeighborhoodError(NumericError):
    """A local Gram submatrix is numerically singular; the neighborhood is unusable."""


class SeparationError(NumericError):
    """A logistic fit diverged (complete or quasi-complete separation)."""


class CostError(FacarError, RuntimeError):
    """A combinatorial guard was exceeded; the message states the estimated cost."""


class ConfigError(FacarError, ValueError):
    """One or more experiment-config problems; ``problems`` lists all of them."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config: " + "; ".join(self.problems))
