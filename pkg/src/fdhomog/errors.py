"""Exception hierarchy shared by the library and the command line."""


class FdHomogError(Exception):
    """Base class for every error raised by this package."""


class ContractError(FdHomogError, ValueError):
    """Inputs violate a documented precondition (shape or grid mismatch)."""


class DegenerateInputError(FdHomogError, ValueError):
    """Too few curves or grid points for the requested operation."""


class DegenerateSampleError(FdHomogError, ValueError):
    """A sample makes a depth undefined, e.g. zero bandwidth for h-modal depth."""


class NumericError(FdHomogError, ArithmeticError):
    """A numerical routine failed, e.g. Cholesky factorization."""


class ParseError(FdHomogError, ValueError):
    """A data file could not be parsed into a functional sample.

    ``row`` and ``column`` are 1-based positions in the file, when known.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
