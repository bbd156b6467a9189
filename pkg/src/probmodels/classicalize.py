"""Semiclassical covers and the canonical classical explanation.

The cover of a test space keeps one private copy ``(x, E)`` of every outcome
per test containing it, so its tests are disjoint.  The dispersion-free weights
``S`` of the cover index the points of a finite classical model whose tests are
all partitions of ``S``; each cover outcome goes to the block of points that
assign it probability one.  States of the classical model are the probability
vectors on ``S`` whose barycenter is a (lifted) state of the original model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import DomainError, HypothesisViolation, StructuralError
from .exactlp import (
    ONE,
    ZERO,
    Infeasible,
    LinearSystem,
    _phase_one,
    enumerate_vertices,
    hull_membership,
    solve_feasibility,
    to_fraction,
)
from .morphisms import Explanation, Morphism, check_morphism
from .testspace import Outcome, TestSpace, label, sort_key, sorted_outcomes
from .weights import ProbModel, Weight, check_weight, enumerate_dispersion_free

# explicit enumeration of Borel outcomes, tests and generators is capped here
MAX_EXPLICIT_POINTS = 12


class CoverOutcome(NamedTuple):
    """Outcome ``base`` as it occurs in the test ``context``."""

    base: Outcome
    context: frozenset


def cover_space(M: TestSpace) -> TestSpace:
    return TestSpace([CoverOutcome(x, E) for x in E] for E in M.tests)


def lift_weight(alpha: Mapping[Outcome, Fraction], M: TestSpace) -> Weight:
    """``alpha~(x, E) = alpha(x)``."""
    return Weight({CoverOutcome(x, E): alpha[x] for E in M.tests for x in E})


def semiclassical_cover(A: ProbModel) -> tuple[ProbModel, Morphism]:
    """The cover model and its projection ``(x, E) -> x``."""
    space = cover_space(A.space)
    cover = ProbModel(space, [lift_weight(a, A.space) for a in A.generators])
    projection = Morphism(cover, A, {xe: {xe.base} for xe in space.outcomes})
    return cover, projection


def dispersion_free_cover_states(A: ProbModel) -> list[Weight]:
    return enumerate_dispersion_free(cover_space(A.space))


class Measure:
    """A probability vector on points ``0..n-1``; indexing by a block sums its mass."""

    __slots__ = ("masses",)

    def __init__(self, masses: Iterable[object]) -> None:
        self.masses = tuple(to_fraction(m) for m in masses)

    def __getitem__(self, block: Iterable[int]) -> Fraction:
        return sum((self.masses[i] for i in block), ZERO)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Measure) and self.masses == other.masses

    def __hash__(self) -> int:
        return hash(self.masses)

    def __repr__(self) -> str:
        return "Measure(" + ", ".join(str(m) for m in self.masses) + ")"

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.masses) if m)

    def vector(self, blocks: Sequence[Iterable[int]]) -> tuple[Fraction, ...]:
        return tuple(self[b] for b in blocks)


def _set_partitions(items: list[int]) -> Iterator[list[frozenset]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        yield [frozenset([first])] + partition
        for k in range(len(partition)):
            yield partition[:k] + [partition[k] | {first}] + partition[k + 1 :]


class FiniteBorelSpace:
    """All partitions of ``{0, ..., size-1}`` into non-empty blocks.

    Outcomes are the non-empty blocks.  Tests are never stored; the predicates
    work directly on collections of blocks.
    """

    __test__ = False

    def __init__(self, size: int) -> None:
        if size < 1:
            raise StructuralError("a Borel space needs at least one point")
        self.size = size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteBorelSpace) and self.size == other.size

    def __hash__(self) -> int:
        return hash(("borel", self.size))

    def __repr__(self) -> str:
        return f"FiniteBorelSpace({self.size})"

    @property
    def outcome_count(self) -> int:
        return 2**self.size - 1

    def _guard(self) -> None:
        if self.size > MAX_EXPLICIT_POINTS:
            raise DomainError(f"refusing to list the subsets of {self.size} points")

    @cached_property
    def outcomes(self) -> tuple[frozenset, ...]:
        self._guard()
        points = range(self.size)
        return sorted_outcomes(
            frozenset(c) for k in range(1, self.size + 1) for c in combinations(points, k)
        )

    @cached_property
    def tests(self) -> tuple[frozenset, ...]:
        self._guard()
        return tuple(sorted((frozenset(p) for p in _set_partitions(list(range(self.size)))), key=sort_key))

    def index(self, block: frozenset) -> int:
        return self.outcomes.index(block)

    def _blocks(self, a: Iterable[Any]) -> frozenset:
        blocks = frozenset(a)
        for b in blocks:
            if not isinstance(b, frozenset) or not b:
                raise StructuralError(f"{b!r} is not a non-empty block of points")
            if any(not isinstance(i, int) or not 0 <= i < self.size for i in b):
                raise StructuralError(f"block {label(b)} has points outside 0..{self.size - 1}")
        return blocks

    def is_event(self, a: Iterable[Any]) -> bool:
        blocks = self._blocks(a)
        return sum(len(b) for b in blocks) == len(frozenset().union(*blocks))

    def is_test(self, a: Iterable[Any]) -> bool:
        blocks = self._blocks(a)
        return self.is_event(blocks) and frozenset().union(*blocks) == frozenset(range(self.size))

    def orthogonal_events(self, a: frozenset, b: frozenset) -> bool:
        return not (a & b) and self.is_event(a | b)

    def are_perspective(self, a: Iterable[Any], b: Iterable[Any]) -> bool:
        a, b = self._blocks(a), self._blocks(b)
        if not (self.is_event(a) and self.is_event(b)):
            raise DomainError("perspectivity is only defined for events")
        return frozenset().union(*a) == frozenset().union(*b)

    def events(self) -> list[frozenset]:
        found = {frozenset(c) for p in self.tests for k in range(len(p) + 1) for c in combinations(p, k)}
        return sorted(found, key=lambda e: (len(e), sort_key(e)))


class FiniteBorelModel:
    """The classical model over the dispersion-free states of a cover.

    ``points`` are d.f. weights on ``base.space``; states are measures on the
    points whose barycenter lies in the state space of ``base``.
    """

    __slots__ = ("points", "base", "space", "canonical", "_generators")

    def __init__(self, points: Sequence[Weight], base: ProbModel) -> None:
        self.points = tuple(points)
        self.base = base
        self.space = FiniteBorelSpace(len(self.points))
        self.canonical = {
            x: frozenset([frozenset(i for i, s in enumerate(self.points) if s[x] == 1)])
            for x in base.outcomes
        }
        self._generators: tuple[Measure, ...] | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteBorelModel) and self.points == other.points and self.base == other.base

    def __hash__(self) -> int:
        return hash((self.points, self.base))

    def __repr__(self) -> str:
        return f"FiniteBorelModel({len(self.points)} points over {self.base!r})"

    @property
    def outcomes(self) -> tuple[frozenset, ...]:
        return self.space.outcomes

    @property
    def full(self) -> bool:
        return False

    def barycenter(self, mu: Measure) -> Weight:
        return Weight(
            {x: sum((m for m, s in zip(mu.masses, self.points) if m and s[x]), ZERO) for x in self.base.outcomes}
        )

    def as_measure(self, w: Any) -> Measure | None:
        """Read a weight on blocks (or a Measure) as point masses, if it is additive."""
        if isinstance(w, Measure):
            return w if len(w.masses) == len(self.points) else None
        try:
            masses = [to_fraction(w[frozenset([i])]) for i in range(len(self.points))]
        except KeyError:
            return None
        mu = Measure(masses)
        if any(w[b] != mu[b] for b in w):
            return None
        return mu

    def contains_subnormalized(self, w: Any) -> bool:
        mu = self.as_measure(w)
        if mu is None or any(m < 0 for m in mu.masses):
            return False
        t = sum(mu.masses, ZERO)
        if t == 0:
            return True
        if t > 1:
            return False
        return self.base.contains(self.barycenter(Measure(m / t for m in mu.masses)))

    def contains(self, w: Any) -> bool:
        mu = self.as_measure(w)
        return (
            mu is not None
            and sum(mu.masses, ZERO) == 1
            and self.contains_subnormalized(mu)
        )

    def _is_canonical(self, mapping: Mapping, source: Any) -> bool:
        return source == self.base and dict(mapping) == self.canonical

    def pullbacks_are_states(self, mapping: Mapping, source: Any) -> bool:
        # canonical pullback of a measure is its barycenter, a base state by definition
        return self._is_canonical(mapping, source)

    def state_preimage_exists(self, mapping: Mapping, source: Any) -> bool | None:
        if not self._is_canonical(mapping, source):
            return None
        return all(isinstance(barycenter_measure(self, a), Measure) for a in self.base.generators)

    @property
    def generators(self) -> tuple[Measure, ...]:
        """Extreme states, by vertex enumeration of a lifted polytope (small ``S`` only)."""
        if self._generators is None:
            self._generators = _borel_generators(self)
        return self._generators


def _borel_generators(bor: FiniteBorelModel) -> tuple[Measure, ...]:
    n = len(bor.points)
    if n > MAX_EXPLICIT_POINTS:
        raise DomainError(f"explicit state generators are only exported for at most {MAX_EXPLICIT_POINTS} points")
    gens = bor.base.generators
    k = len(gens)
    if k == 0:
        return ()
    dim = n + k
    eqs = [(tuple([ONE] * n + [ZERO] * k), ONE), (tuple([ZERO] * n + [ONE] * k), ONE)]
    for x in bor.base.outcomes:
        row = [ONE if s[x] else ZERO for s in bor.points] + [-g[x] for g in gens]
        eqs.append((tuple(row), ZERO))
    ineqs = [(tuple(-ONE if j == i else ZERO for j in range(dim)), ZERO) for i in range(dim)]
    lifted = enumerate_vertices(LinearSystem(dim, tuple(eqs), tuple(ineqs)))
    candidates = sorted({v[:n] for v in lifted})
    extreme = [
        c for i, c in enumerate(candidates) if not hull_membership(c, candidates[:i] + candidates[i + 1 :])
    ]
    return tuple(Measure(c) for c in extreme)


def barycenter_measure(bor: FiniteBorelModel, alpha: Mapping[Outcome, object]) -> Measure | Infeasible:
    """A probability vector on the points whose barycenter is ``alpha``."""
    alpha = check_weight(bor.base.space, alpha)
    n = len(bor.points)
    A = [[ONE] * n] + [[ONE if s[x] else ZERO for s in bor.points] for x in bor.base.outcomes]
    b = [ONE] + [alpha[x] for x in bor.base.outcomes]
    tab, _ = _phase_one(A, b, n, clean=False)
    if tab is None:
        system = LinearSystem(
            n,
            tuple(zip(map(tuple, A), b)),
            tuple((tuple(-ONE if j == i else ZERO for j in range(n)), ZERO) for i in range(n)),
        )
        result = solve_feasibility(system)
        assert isinstance(result, Infeasible)
        return result
    mu = Measure(tab.solution(n))
    assert bor.barycenter(mu) == alpha
    return mu


@dataclass(frozen=True)
class Borelification:
    """The cover, its projection, the classical model and the embedding into it."""

    cover: ProbModel
    quotient: Morphism
    embedding: Morphism
    borel: FiniteBorelModel

    @property
    def explanation(self) -> Explanation:
        return Explanation(self.cover, self.quotient, self.embedding)

    @property
    def points(self) -> tuple[Weight, ...]:
        return self.borel.points


@lru_cache(maxsize=64)
def borelify(A: ProbModel) -> Borelification:
    """Canonical classical explanation of ``A``.

    Requires at most one single-outcome test; otherwise distinct cover outcomes
    could not be told apart by dispersion-free states.
    """
    singles = tuple(t for t in A.space.tests if len(t) == 1)
    if len(singles) > 1:
        raise HypothesisViolation(
            f"{len(singles)} single-outcome tests: {', '.join(label(t) for t in singles)}", singles
        )
    cover, projection = semiclassical_cover(A)
    points = enumerate_dispersion_free(cover.space)
    bor = FiniteBorelModel(points, cover)
    images = list(bor.canonical.values())
    assert all(next(iter(v)) for v in images), "empty image on a semiclassical cover"
    assert len(set(images)) == len(images), "dispersion-free states fail to separate cover outcomes"
    embedding = check_morphism(cover, bor, bor.canonical)
    return Borelification(cover, projection, embedding, bor)


def bor_point_map(phi: Morphism) -> tuple[int, ...]:
    """Index map ``S_B -> S_A`` sending a d.f. state to its pullback along the lifted map."""
    src, tgt = borelify(phi.source), borelify(phi.target)
    where = {s: i for i, s in enumerate(src.points)}
    result = []
    for s in tgt.points:
        pulled = {}
        for E in phi.source.space.tests:
            FE = phi.image(E)
            for x in E:
                pulled[CoverOutcome(x, E)] = sum((s[CoverOutcome(y, FE)] for y in phi(x)), ZERO)
        result.append(where[Weight(pulled)])
    return tuple(result)


def bor_on_morphism(phi: Morphism) -> Morphism:
    """``Bor(phi)``: a block of ``S_A`` goes to its preimage under :func:`bor_point_map`.

    Only test-preserving morphisms are supported.
    """
    if not all(phi.target.space.is_test(phi.image(E)) for E in phi.source.space.tests):
        raise DomainError("Bor is only implemented on test-preserving morphisms")
    f = bor_point_map(phi)
    source, target = borelify(phi.source).borel, borelify(phi.target).borel
    mapping = {}
    for block in source.outcomes:
        pre = frozenset(t for t, s in enumerate(f) if s in block)
        mapping[block] = frozenset([pre]) if pre else frozenset()
    return check_morphism(source, target, mapping)
