"""Exception taxonomy shared by all modules."""

from __future__ import annotations


class DoctrinaError(Exception):
    """Base class for engine errors."""


class DomainMismatchError(DoctrinaError):
    """Composition of a non-composable pair was requested."""


class FragmentIncompleteError(DoctrinaError):
    """An operation needs a product (or other structure) the fragment does not declare."""


class BrokenProductError(DoctrinaError):
    """A declared product violates its universal property (zero or several pairings)."""


class LookupMissError(DoctrinaError):
    """An id was used that the structure does not declare."""


class StructureMissingError(DoctrinaError):
    """Chosen structure (delta, comprehensions, quotients) required but absent."""


class PreconditionError(DoctrinaError):
    """An operation's stated precondition does not hold."""


class InternalConsistencyError(DoctrinaError):
    """A construction invariant failed; indicates corrupt input or an engine bug."""


class ResourceGuardError(DoctrinaError):
    """A size guard tripped.  Carries the measured sizes."""

    def __init__(self, message: str, sizes: dict | None = None):
        super().__init__(message)
        self.sizes = dict(sizes or {})


class ParseError(DoctrinaError):
    """A document failed to parse; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class IntegrityError(DoctrinaError):
    """A document references an undeclared id or violates the schema."""
