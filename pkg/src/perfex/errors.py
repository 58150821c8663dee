"""Exception types shared across the package."""

from __future__ import annotations


class PerfexError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(PerfexError):
    """Malformed tabular input: bad row, wrong arity, missing value, bad score."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class UnknownClassError(DataFormatError):
    """A label column contains a class that is not in the declared class set."""


class EmptyTableError(DataFormatError):
    """A table with zero rows where at least one row is required."""


class MissingScoresError(PerfexError):
    """A score-based metric was evaluated on a table without score columns."""


class UndefinedMetricError(PerfexError):
    """A metric value was required but is undefined on the given rows."""


class SchemaMismatchError(PerfexError):
    """A table does not match the schema fingerprint a tree was built on."""


class TreeFormatError(PerfexError):
    """A serialized tree document is malformed or has an unsupported version."""
