"""Exception types shared across the package.

The HTTP service maps these onto status codes (see service.py); everywhere
else they propagate as ordinary exceptions.
"""


class SeqboxError(Exception):
    """Base class for all package errors."""


class SchemaError(SeqboxError):
    """A column mapping, attribute definition, or value violates the schema."""


class NotFoundError(SeqboxError):
    """A referenced occurrence, sequence, or session does not exist."""


class UnknownAttributeError(SeqboxError):
    """An attribute name is not in the schema (and is not a derived name)."""


class QueryTypeError(SeqboxError):
    """A query literal does not match the attribute's kind."""


class StaleSelectionError(SeqboxError):
    """Selections refer to different dataset versions and cannot be combined."""


class ConfigError(SeqboxError):
    """An operation was configured with invalid or inconsistent parameters."""


class EmptyDatasetError(SeqboxError):
    """A load produced zero accepted rows."""


class EmptyInputError(SeqboxError):
    """A summary was requested over zero values."""


class InsufficientDataError(SeqboxError):
    """Too few groups, levels, or observations for the requested statistic."""


class NumericError(SeqboxError):
    """A statistic or degrees-of-freedom argument is non-finite or invalid."""


class StateError(SeqboxError):
    """The session is not in a state where the requested action is valid."""


class ParseError(SeqboxError):
    """Query text could not be parsed.

    Carries the character offset where parsing failed and the set of token
    descriptions that would have been accepted there.
    """

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = tuple(sorted(expected))
        detail = f"{message} at position {position}"
        if self.expected:
            detail += " (expected " + " or ".join(self.expected) + ")"
        super().__init__(detail)
