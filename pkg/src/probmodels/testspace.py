"""Test spaces: tests, events, orthogonality and perspectivity.

Outcomes are any hashable labels that :func:`sort_key` understands: strings,
integers, tuples of outcomes (pairs in products, cover outcomes) and
frozensets (blocks of points in a finite Borel space).  All enumeration orders
derive from :func:`sort_key`, so results are reproducible.
"""

from __future__ import annotations

from itertools import chain, combinations
from typing import Hashable, Iterable, Iterator

from .errors import DomainError, StructuralError

Outcome = Hashable
Event = frozenset


def sort_key(outcome: object) -> tuple:
    """Total order on outcome labels, used for every canonical ordering."""
    if isinstance(outcome, str):
        return (0, outcome)
    if isinstance(outcome, int) and not isinstance(outcome, bool):
        return (1, outcome)
    if isinstance(outcome, tuple):
        return (2, tuple(sort_key(p) for p in outcome))
    if isinstance(outcome, frozenset):
        return (3, tuple(sorted(sort_key(p) for p in outcome)))
    raise TypeError(f"unsupported outcome label {outcome!r}")


def sorted_outcomes(outcomes: Iterable[Outcome]) -> tuple:
    return tuple(sorted(outcomes, key=sort_key))


def label(outcome: object) -> str:
    """Human-readable string label, injective on the supported label types."""
    if isinstance(outcome, str):
        return outcome
    if isinstance(outcome, int):
        return str(outcome)
    if hasattr(outcome, "base") and hasattr(outcome, "context"):
        return f"{label(outcome.base)}@{label(outcome.context)}"
    if isinstance(outcome, tuple):
        return "(" + ",".join(label(p) for p in outcome) + ")"
    if isinstance(outcome, frozenset):
        return "{" + ",".join(label(p) for p in sorted_outcomes(outcome)) + "}"
    raise TypeError(f"unsupported outcome label {outcome!r}")


def _powerset(items: tuple) -> Iterator[tuple]:
    return chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))


class TestSpace:
    """A finite collection of non-empty tests; the outcome set is their union."""

    __test__ = False  # keep pytest from collecting this class
    __slots__ = ("tests", "outcomes", "_index", "_hash")

    def __init__(self, tests: Iterable[Iterable[Outcome]], outcomes: Iterable[Outcome] | None = None) -> None:
        unique: dict[frozenset, None] = {}
        for t in tests:
            test = frozenset(t)
            if not test:
                raise StructuralError("tests must be non-empty")
            for x in test:
                sort_key(x)
            unique[test] = None
        if not unique:
            raise StructuralError("a test space needs at least one test")
        self.tests: tuple[frozenset, ...] = tuple(sorted(unique, key=sort_key))
        universe = frozenset().union(*self.tests)
        if outcomes is not None:
            declared = list(outcomes)
            if len(set(declared)) != len(declared):
                raise StructuralError("duplicate outcome labels")
            if set(declared) != universe:
                extra = sorted_outcomes(set(declared) - universe)
                missing = sorted_outcomes(universe - set(declared))
                raise StructuralError(
                    f"declared outcomes differ from the union of tests (not in any test: {extra}, undeclared: {missing})"
                )
        self.outcomes: tuple = sorted_outcomes(universe)
        self._index = {x: i for i, x in enumerate(self.outcomes)}
        self._hash = hash(self.tests)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TestSpace) and self.tests == other.tests

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "TestSpace(" + ", ".join(label(t) for t in self.tests) + ")"

    def index(self, x: Outcome) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise StructuralError(f"unknown outcome {x!r}") from None

    def _check(self, a: Iterable[Outcome]) -> frozenset:
        a = frozenset(a)
        for x in a:
            self.index(x)
        return a

    def is_event(self, a: Iterable[Outcome]) -> bool:
        a = self._check(a)
        return any(a <= t for t in self.tests)

    def is_test(self, a: Iterable[Outcome]) -> bool:
        return self._check(a) in self.tests

    def are_orthogonal(self, x: Outcome, y: Outcome) -> bool:
        if x == y:
            raise DomainError("orthogonality is only defined for distinct outcomes")
        return self.is_event((x, y))

    def orthogonal_events(self, a: frozenset, b: frozenset) -> bool:
        """Disjoint events whose union is again an event."""
        return not (a & b) and self.is_event(a | b)

    def are_perspective(self, a: Iterable[Outcome], b: Iterable[Outcome]) -> bool:
        """True iff ``a`` and ``b`` share a complement ``c`` with ``a|c`` and ``b|c`` tests."""
        a, b = frozenset(a), frozenset(b)
        if not (self.is_event(a) and self.is_event(b)):
            raise DomainError("perspectivity is only defined for events")
        for t in self.tests:
            if a <= t:
                c = t - a
                if not (c & b) and (b | c) in self.tests:
                    return True
        return False

    def events(self) -> list[frozenset]:
        """All events, sorted by size then label."""
        found: set[frozenset] = set()
        for t in self.tests:
            found.update(frozenset(s) for s in _powerset(sorted_outcomes(t)))
        return sorted(found, key=lambda e: (len(e), sort_key(e)))

    def tests_containing(self, x: Outcome) -> tuple[frozenset, ...]:
        self.index(x)
        return tuple(t for t in self.tests if x in t)

    def is_irredundant(self) -> bool:
        return not any(s < t for s in self.tests for t in self.tests)

    def is_semiclassical(self) -> bool:
        return all(not (s & t) for s, t in combinations(self.tests, 2))

    def count_single_outcome_tests(self) -> int:
        return sum(1 for t in self.tests if len(t) == 1)


def is_event(M: TestSpace, a: Iterable[Outcome]) -> bool:
    return M.is_event(a)


def are_orthogonal(M: TestSpace, x: Outcome, y: Outcome) -> bool:
    return M.are_orthogonal(x, y)


def are_perspective(M: TestSpace, a: Iterable[Outcome], b: Iterable[Outcome]) -> bool:
    return M.are_perspective(a, b)


def is_irredundant(M: TestSpace) -> bool:
    return M.is_irredundant()


def is_semiclassical(M: TestSpace) -> bool:
    return M.is_semiclassical()


def count_single_outcome_tests(M: TestSpace) -> int:
    return M.count_single_outcome_tests()
