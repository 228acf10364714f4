"""Exception hierarchy shared by the library and the command-line front end."""


class EspmError(Exception):
    """Base class for all errors raised by espm."""


class ConfigError(EspmError, ValueError):
    """Invalid mining or command-line configuration."""


class DatasetError(EspmError):
    """Problem with input data."""


class SchemaError(DatasetError):
    """The input table does not have the expected columns."""


class ParseError(DatasetError):
    """A row of the input could not be parsed."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class EmptyInputError(DatasetError):
    """The input contains no samples."""


class BinningError(DatasetError):
    """A numeric column could not be discretised."""


class StatisticError(EspmError, ValueError):
    """A statistic is undefined for the given input."""


class OracleCapExceeded(EspmError):
    """The brute-force oracle refuses inputs above its size limits."""
