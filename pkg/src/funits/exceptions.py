"""Exception hierarchy.

Every error raised by the package derives from :class:`FunitsError` and
carries an ``exit_code`` used by the command line front end.
"""


class FunitsError(Exception):
    exit_code = 1


class ConfigError(FunitsError, ValueError):
    """Invalid parameter, preset name or configuration file."""

    exit_code = 2


class DataError(FunitsError, ValueError):
    exit_code = 3


class IoError(DataError, OSError):
    """File missing, unreadable or unwritable."""


class ParseError(DataError):
    """Malformed CSV content. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class RaggedError(ParseError):
    """Rows of a CSV file have inconsistent field counts."""


class NegativeEntryError(DataError):
    def __init__(self, row, col, value):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(
            f"negative entry {value!r} at row {row}, col {col} in a non-negative matrix"
        )


class ShapeError(DataError):
    pass


class LengthError(DataError):
    pass


class EmptyRegionError(DataError):
    pass


class DegenerateError(DataError):
    pass


class NumericalError(FunitsError, ArithmeticError):
    """Non-finite values appeared during an iterative solve."""

    exit_code = 4
