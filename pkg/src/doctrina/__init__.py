"""Finite elementary doctrines, their free completions, and structural verification.

The engine represents doctrines over finite categories with declared product
fragments, builds the comprehension / diagonal / quotient completions, and
checks the associated monad laws, algebra correspondences and distributive
law exhaustively at desk scale.
"""

from doctrina.errors import (
    BrokenProductError,
    DoctrinaError,
    DomainMismatchError,
    FragmentIncompleteError,
    IntegrityError,
    InternalConsistencyError,
    LookupMissError,
    ParseError,
    PreconditionError,
    ResourceGuardError,
    StructureMissingError,
)
from doctrina.guards import SizeGuard
from doctrina.report import Check, FAIL, PASS, SKIP, VerificationReport

__all__ = [
    "BrokenProductError",
    "Check",
    "DoctrinaError",
    "DomainMismatchError",
    "FAIL",
    "FragmentIncompleteError",
    "IntegrityError",
    "InternalConsistencyError",
    "LookupMissError",
    "PASS",
    "ParseError",
    "PreconditionError",
    "ResourceGuardError",
    "SKIP",
    "SizeGuard",
    "StructureMissingError",
    "VerificationReport",
]

__version__ = "0.1.0"
