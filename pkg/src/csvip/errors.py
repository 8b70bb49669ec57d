"""Exception types shared across the package."""


class CsvipError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(CsvipError):
    """A vector, set, or operator has an incompatible dimension."""


class InvalidSetError(CsvipError):
    """A convex set was constructed from invalid data."""


class InconsistentSystemError(InvalidSetError):
    """A linear system Ax = b has no solution, so the set is empty."""


class InvalidProblemError(CsvipError):
    """A problem instance is structurally unusable for the requested solver."""


class NotIsmError(CsvipError):
    """An operator admits no positive inverse-strong-monotonicity constant."""


class StepSizeError(CsvipError):
    """A step length lies outside the admissible open interval."""


class ScheduleError(CsvipError):
    """An index schedule is empty or references an unknown instance."""


class ConvergenceError(CsvipError):
    """An iterative routine exhausted its budget before reaching tolerance."""


class OracleError(CsvipError):
    """A reference oracle cannot be applied to the given instance."""


class ProblemFormatError(CsvipError):
    """A problem or result document violates the interchange schema.

    Carries a short machine-readable ``code`` so callers can distinguish
    rejection causes without parsing the message text.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
