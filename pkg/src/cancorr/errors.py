"""Exception types shared across the package."""


class CancorrError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(CancorrError):
    """An argument violates a documented precondition."""


class InvalidState(CancorrError):
    """An operation was called on an object in the wrong state."""


class DegenerateData(CancorrError):
    """Data is too degenerate to analyse (e.g. zero rank after centering)."""


class NotPositiveSemidefinite(CancorrError):
    """A matrix required to be PSD has a significantly negative eigenvalue."""


class NumericalFailure(CancorrError):
    """An iterative numerical procedure failed to produce a usable result."""


class FormatError(CancorrError):
    """A text data file does not match the expected format.

    Carries the 1-based line number and, when known, the 1-based column.
    """

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
