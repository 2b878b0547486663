"""Exception types shared across the package."""


class GclmError(Exception):
    """Base class for all package errors."""


class DomainError(GclmError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateSampleError(GclmError, ValueError):
    """The sample carries no scale information (e.g. all values equal)."""


class InsufficientSampleError(GclmError, ValueError):
    """The sample is too small for the requested statistic."""


class NonConvergenceError(GclmError, RuntimeError):
    """An iterative numerical procedure failed to stabilise."""


class ParseError(GclmError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
