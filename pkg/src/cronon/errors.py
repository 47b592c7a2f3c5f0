"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract (see cli.py): invalid
input -> 2, invariant/numeric failures -> 3, model mismatch -> 4.
"""


class CrononError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CrononError, ValueError):
    """Arguments violate a documented precondition."""


class DimensionMismatchError(InvalidInputError):
    """Operands have incompatible dimensions."""


class NumericFailureError(CrononError, ArithmeticError):
    """A numerical routine could not reach its accuracy target.

    Carries the achieved error estimate so callers can report it.
    """

    def __init__(self, message: str, achieved_error: float | None = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class InvariantViolationError(CrononError):
    """A state failed validation against the density-matrix invariants."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report if report is not None else []


class DegenerateInputError(CrononError, ValueError):
    """A quantity needed for the requested report is identically zero.

    Carries the offending values so callers can explain the failure.
    """

    def __init__(self, message: str, **payload):
        super().__init__(message)
        self.payload = dict(payload)


class ModelMismatchError(CrononError):
    """A calibrated formula disagrees with its independent numeric oracle."""

    def __init__(self, message: str, formula_value: float, oracle_value: float):
        super().__init__(message)
        self.formula_value = formula_value
        self.oracle_value = oracle_value


class NumericWarning(UserWarning):
    """A result is returned but an accuracy target was missed."""
