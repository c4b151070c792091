"""Error hierarchy shared by the library layer and the management commands.

Every error carries the exit code the command line reports for it.
"""


class DivergenceError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1


class StructureError(DivergenceError):
    """Invalid graph structure, variable tables or model files"""

    exit_code = 2


class NotChordalError(StructureError):
    pass


class CardinalityMismatchError(StructureError):
    pass


class DataError(DivergenceError):
    """Malformed or unusable sample data"""

    exit_code = 3


class PositivityError(DivergenceError):
    """A factor has a zero or negative entry where strict positivity is required"""

    exit_code = 4

    def __init__(self, message: str, scope: tuple = ()):
        super().__init__(message)
        self.scope = tuple(scope)


class UndefinedQuotientError(PositivityError):
    """Nonzero numerator over a zero denominator"""


class NonFiniteResultError(DivergenceError):
    """Overflow or NaN during accumulation"""

    exit_code = 5


class DomainTooLargeError(DivergenceError):
    """The brute-force oracle refuses to enumerate the domain"""

    exit_code = 6
