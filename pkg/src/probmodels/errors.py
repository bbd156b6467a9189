"""Exception types shared across the package."""

from __future__ import annotations


class StructuralError(ValueError):
    """Malformed input: wrong dimensions, unknown outcomes, empty tests."""


class DomainError(ValueError):
    """Well-formed input outside an operation's domain."""


class UnboundedError(DomainError):
    """A polyhedron expected to be bounded has a recession direction."""

    def __init__(self, message: str, direction: tuple) -> None:
        super().__init__(message)
        self.direction = direction


class HypothesisViolation(DomainError):
    """A model fails the single-outcome-test hypothesis of the Borel embedding."""

    def __init__(self, message: str, witness: tuple) -> None:
        super().__init__(message)
        self.witness = witness


class MorphismViolation(ValueError):
    """A candidate map fails one of the morphism conditions.

    ``condition`` is one of ``"i"``, ``"ii"``, ``"iii"`` or ``"pm"``; ``witness``
    holds the offending data.
    """

    def __init__(self, condition: str, message: str, witness: tuple) -> None:
        super().__init__(f"condition ({condition}) fails: {message}")
        self.condition = condition
        self.witness = witness
