"""Probability weights, dispersion-free weights and probabilistic models."""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, StructuralError
from .exactlp import (
    ONE,
    ZERO,
    LinearSystem,
    Member,
    NotMember,
    Vector,
    enumerate_vertices,
    hull_membership,
    nullspace,
    to_fraction,
)
from .testspace import Outcome, TestSpace, label, sort_key


class Weight(Mapping):
    """An immutable map from outcomes to exact rationals.

    Validity against a test space is not enforced here (pullbacks can be
    sub-normalized); use :func:`check_weight` for that.
    """

    __slots__ = ("_values", "_hash")

    def __init__(self, values: Mapping[Outcome, object] | Iterable[tuple[Outcome, object]]) -> None:
        items = values.items() if isinstance(values, Mapping) else values
        converted = {x: to_fraction(v) for x, v in items}
        self._values = {x: converted[x] for x in sorted(converted, key=sort_key)}
        self._hash: int | None = None

    def __getitem__(self, x: Outcome) -> Fraction:
        return self._values[x]

    def __iter__(self) -> Iterator[Outcome]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Weight):
            return self._values == other._values
        if isinstance(other, Mapping):
            return self._values == dict(other.items())
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._values.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{label(x)}: {v}" for x, v in self._values.items())
        return f"{type(self).__name__}({{{body}}})"

    def vector(self, outcomes: Sequence[Outcome]) -> tuple[Fraction, ...]:
        return tuple(self._values[x] for x in outcomes)

    def total(self, event: Iterable[Outcome]) -> Fraction:
        return sum((self._values[x] for x in event), ZERO)

    def scaled(self, c: object) -> "Weight":
        c = to_fraction(c)
        return Weight({x: c * v for x, v in self._values.items()})

    def support(self) -> frozenset:
        return frozenset(x for x, v in self._values.items() if v)


def convex_combination(terms: Iterable[tuple[object, Weight]]) -> Weight:
    """``sum(c * w)`` over ``(c, w)`` pairs sharing one domain."""
    acc: dict[Outcome, Fraction] = {}
    for c, w in terms:
        c = to_fraction(c)
        for x, v in w.items():
            acc[x] = acc.get(x, ZERO) + c * v
    return Weight(acc)


def check_weight(M: TestSpace, w: Mapping[Outcome, object]) -> Weight:
    """Validate ``w`` as a probability weight on ``M``."""
    keys = set(w)
    missing = [x for x in M.outcomes if x not in keys]
    if missing:
        raise StructuralError(f"weight undefined on {[label(x) for x in missing]}")
    unknown = keys - set(M.outcomes)
    if unknown:
        raise StructuralError(f"weight defined on unknown outcomes {sorted(map(label, unknown))}")
    weight = w if isinstance(w, Weight) and type(w) is Weight else Weight(w)
    for x, v in weight.items():
        if not ZERO <= v <= ONE:
            raise DomainError(f"value {v} at {label(x)} outside [0, 1]")
    for t in M.tests:
        s = weight.total(t)
        if s != 1:
            raise DomainError(f"test {label(t)} sums to {s}, not 1")
    return weight


def is_probability_weight(M: TestSpace, w: Mapping[Outcome, object]) -> bool:
    try:
        check_weight(M, w)
    except (DomainError, StructuralError):
        return False
    return True


def enumerate_dispersion_free(M: TestSpace) -> list[Weight]:
    """Every {0,1}-valued probability weight, in lexicographic order of value vectors."""
    xs = M.outcomes
    tests_of = [[k for k, t in enumerate(M.tests) if x in t] for x in xs]
    unassigned = [len(t) for t in M.tests]
    sums = [0] * len(M.tests)
    values = [0] * len(xs)
    found: list[Weight] = []

    def extend(i: int) -> None:
        if i == len(xs):
            found.append(Weight(zip(xs, values)))
            return
        for v in (0, 1):
            if any(
                sums[k] + v > 1 or (unassigned[k] == 1 and sums[k] + v != 1) for k in tests_of[i]
            ):
                continue
            for k in tests_of[i]:
                sums[k] += v
                unassigned[k] -= 1
            values[i] = v
            extend(i + 1)
            for k in tests_of[i]:
                sums[k] -= v
                unassigned[k] += 1

    extend(0)
    return found


def weight_polytope(M: TestSpace) -> LinearSystem:
    """``Pr(M)`` as a linear system over ``M.outcomes``."""
    n = len(M.outcomes)
    eqs = tuple(
        (tuple(ONE if x in t else ZERO for x in M.outcomes), ONE) for t in M.tests
    )
    ineqs = tuple((tuple(-ONE if k == i else ZERO for k in range(n)), ZERO) for i in range(n))
    return LinearSystem(n, eqs, ineqs)


@lru_cache(maxsize=128)
def _polytope_vertices(M: TestSpace) -> tuple[Weight, ...]:
    return tuple(Weight(zip(M.outcomes, v)) for v in enumerate_vertices(weight_polytope(M)))


def full_weight_polytope_vertices(M: TestSpace) -> list[Weight]:
    """Extreme points of ``Pr(M)``; may be empty when ``M`` admits no weight."""
    return list(_polytope_vertices(M))


class ProbModel:
    """A test space with a state space given as the convex hull of generators."""

    __slots__ = ("space", "generators", "full", "_hash")

    def __init__(self, space: TestSpace, generators: Iterable[Mapping[Outcome, object]], *, full: bool = False) -> None:
        self.space = space
        unique = {check_weight(space, g) for g in generators}
        self.generators: tuple[Weight, ...] = tuple(
            sorted(unique, key=lambda g: g.vector(space.outcomes))
        )
        self.full = full
        self._hash = hash((space, self.generators))

    @property
    def outcomes(self) -> tuple:
        return self.space.outcomes

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ProbModel)
            and self.space == other.space
            and self.generators == other.generators
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ProbModel({self.space!r}, {len(self.generators)} generators{', full' if self.full else ''})"

    def matrix(self) -> list[tuple[Fraction, ...]]:
        return [g.vector(self.outcomes) for g in self.generators]

    def contains(self, w: Mapping[Outcome, object]) -> bool:
        """Is ``w`` a state of this model?"""
        if not is_probability_weight(self.space, w):
            return False
        if self.full:
            return True
        return bool(hull_membership(Weight(w).vector(self.outcomes), self.matrix()))

    def contains_subnormalized(self, w: Mapping[Outcome, object]) -> bool:
        """Is ``w = t * alpha`` for a state ``alpha`` and some ``0 <= t <= 1``?"""
        w = w if isinstance(w, Weight) else Weight(w)
        if set(w) != set(self.outcomes) or any(v < 0 for v in w.values()):
            return False
        totals = {w.total(t) for t in self.space.tests}
        if len(totals) != 1:
            return False
        t = totals.pop()
        if t == 0:
            return True
        if t > 1:
            return False
        return self.contains(w.scaled(1 / t))


@lru_cache(maxsize=128)
def state_cone(A: ProbModel) -> tuple[tuple[Vector, ...], tuple[Vector, ...]]:
    """``(equalities, facets)`` with ``t * alpha`` (``t >= 0``, ``alpha`` a state) iff
    ``n . w = 0`` for every equality and ``c . w >= 0`` for every facet.

    Facet normals are the extreme rays of the dual cone, taken inside the
    linear span of the generators so that the dual cone is pointed.
    """
    n = len(A.outcomes)
    gens = A.matrix()
    equalities = tuple(nullspace(gens, n))
    basis = [tuple(b) for b in nullspace(equalities, n)] if equalities else [
        tuple(ONE if i == k else ZERO for i in range(n)) for k in range(n)
    ]
    r = len(basis)
    on_gens = [tuple(sum((b[i] * g[i] for i in range(n)), ZERO) for b in basis) for g in gens]
    ineqs = tuple((tuple(-v for v in row), ZERO) for row in on_gens)
    norm = tuple(sum((row[k] for row in on_gens), ZERO) for k in range(r))
    rays = enumerate_vertices(LinearSystem(r, ((norm, ONE),), ineqs))
    facets = tuple(
        tuple(sum((lam[k] * basis[k][i] for k in range(r)), ZERO) for i in range(n)) for lam in rays
    )
    return equalities, facets


def make_full_model(M: TestSpace) -> ProbModel:
    return ProbModel(M, full_weight_polytope_vertices(M), full=True)


def state_membership(A: ProbModel, w: Mapping[Outcome, object]) -> Member | NotMember:
    """Exact hull membership of ``w`` against the generators of ``A``."""
    w = check_weight(A.space, w)
    return hull_membership(w.vector(A.outcomes), A.matrix())
