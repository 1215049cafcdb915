"""Exception types shared across the package."""

from __future__ import annotations


class EnrichError(Exception):
    """Base class for every error raised by ontoenrich."""


class NTriplesError(EnrichError, ValueError):
    """A malformed N-Triples statement.

    ``line`` is 1-based; ``offset`` is the absolute byte offset of the
    offending position in the input.
    """

    def __init__(self, message: str, line: int, offset: int) -> None:
        super().__init__(f"line {line} (byte {offset}): {message}")
        self.reason = message
        self.line = line
        self.offset = offset


class OntologyError(EnrichError, ValueError):
    """Schema or integrity violation in an ontology document.

    ``path`` is a JSON-path style location such as ``$.instances[3].concept``.
    """

    def __init__(self, message: str, path: str = "$") -> None:
        super().__init__(f"{path}: {message}")
        self.reason = message
        self.path = path


class UnknownReference(EnrichError, KeyError):
    """Lookup of an instance or concept id that does not exist."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown reference"


class ContractViolation(EnrichError, ValueError):
    """An operation was called outside its precondition."""
