"""Exception types shared across the package.

Two failure families are distinguished because the CLI maps them to
different exit codes: problems with the supplied data (exit 2) and
numeric failures inside an otherwise valid computation (exit 3).
"""


class DataError(ValueError):
    """Input data violates a precondition (bad record, empty overlap, size mismatch)."""


class NumericError(RuntimeError):
    """A numeric contract could not be met (residual too large, degenerate fit)."""
