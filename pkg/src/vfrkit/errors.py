"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes (see ``cli``).
"""


class ValidationError(ValueError):
    """Malformed or out-of-contract input."""


class DegenerateTemplateError(ValidationError):
    """Template collapsed to a zero exemplar; similarity undefined."""


class NumericError(ArithmeticError):
    """Numerical breakdown (e.g. non-positive-definite innovation)."""


class ConvergenceError(RuntimeError):
    """Iterative solver hit its iteration budget before converging."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap
