"""Product test spaces, non-signalling joint weights and composites."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping

from .errors import DomainError
from .exactlp import (
    ONE,
    ZERO,
    LinearSystem,
    Member,
    NotMember,
    enumerate_vertices,
    hull_membership,
    rank,
)
from .morphisms import Morphism, check_morphism, identity, pullback_weight
from .testspace import Outcome, TestSpace
from .weights import ProbModel, Weight, check_weight, full_weight_polytope_vertices, state_cone


def _space(x: TestSpace | ProbModel) -> TestSpace:
    return x.space if isinstance(x, ProbModel) else x


def product_space(A: TestSpace | ProbModel, B: TestSpace | ProbModel) -> TestSpace:
    """Tests ``E x F``; outcomes are pairs ``(x, y)`` with the first part's outcome first."""
    MA, MB = _space(A), _space(B)
    return TestSpace([(x, y) for x in E for y in F] for E in MA.tests for F in MB.tests)


class JointWeight(Weight):
    """A probability weight on a product test space that remembers its two factors."""

    __slots__ = ("left", "right")

    def __init__(self, values: Mapping[tuple, object], left: TestSpace, right: TestSpace) -> None:
        super().__init__(values)
        self.left = left
        self.right = right
        check_weight(product_space(left, right), self)

    def table(self) -> list[list[Fraction]]:
        return [[self[(x, y)] for y in self.right.outcomes] for x in self.left.outcomes]


def product_weight(alpha: Mapping, beta: Mapping, A: TestSpace | ProbModel, B: TestSpace | ProbModel) -> JointWeight:
    """``(alpha (x) beta)(x, y) = alpha(x) beta(y)``."""
    MA, MB = _space(A), _space(B)
    alpha, beta = check_weight(MA, alpha), check_weight(MB, beta)
    return JointWeight({(x, y): alpha[x] * beta[y] for x in MA.outcomes for y in MB.outcomes}, MA, MB)


def as_joint(w: Mapping, A: TestSpace | ProbModel, B: TestSpace | ProbModel) -> JointWeight:
    return w if isinstance(w, JointWeight) else JointWeight(w, _space(A), _space(B))


@dataclass(frozen=True)
class SignallingWitness:
    """Marginal of ``outcome`` (of party ``party``) differs across two tests of the other party."""

    party: str
    outcome: Outcome
    tests: tuple[frozenset, frozenset]
    values: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class NonSignalling:
    first: Weight
    second: Weight
    first_given_second: dict = field(default_factory=dict)
    second_given_first: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Signalling:
    witness: SignallingWitness

    def __bool__(self) -> bool:
        return False


def _marginal(omega: JointWeight, party: str) -> Weight | SignallingWitness:
    mine, other = (omega.left, omega.right) if party == "first" else (omega.right, omega.left)
    values = {}
    for x in mine.outcomes:
        seen: tuple[frozenset, Fraction] | None = None
        for F in other.tests:
            pairs = [(x, y) if party == "first" else (y, x) for y in F]
            v = omega.total(pairs)
            if seen is None:
                seen = (F, v)
            elif v != seen[1]:
                return SignallingWitness(party, x, (seen[0], F), (seen[1], v))
        values[x] = seen[1]
    return Weight(values)


def marginals_and_conditionals(omega: JointWeight) -> NonSignalling | Signalling:
    """Marginals and conditional states, or a witness that a marginal depends on the partner's test."""
    first = _marginal(omega, "first")
    if isinstance(first, SignallingWitness):
        return Signalling(first)
    second = _marginal(omega, "second")
    if isinstance(second, SignallingWitness):
        return Signalling(second)
    A, B = omega.left, omega.right
    given_y = {
        y: Weight({x: omega[(x, y)] / second[y] for x in A.outcomes}) for y in B.outcomes if second[y]
    }
    given_x = {
        x: Weight({y: omega[(x, y)] / first[x] for y in B.outcomes}) for x in A.outcomes if first[x]
    }
    return NonSignalling(first, second, given_y, given_x)


def nonzero_minor(omega: JointWeight) -> tuple[Outcome, Outcome, Outcome, Outcome, Fraction] | None:
    """First ``(x, x', y, y', det)`` with a non-vanishing 2x2 minor, or None if rank <= 1."""
    xs, ys = omega.left.outcomes, omega.right.outcomes
    for x1, x2 in combinations(xs, 2):
        for y1, y2 in combinations(ys, 2):
            det = omega[(x1, y1)] * omega[(x2, y2)] - omega[(x1, y2)] * omega[(x2, y1)]
            if det:
                return (x1, x2, y1, y2, det)
    return None


def product_factors(omega: JointWeight) -> tuple[Weight, Weight] | None:
    """``(alpha, beta)`` with ``omega = alpha (x) beta``, or None."""
    if nonzero_minor(omega) is not None:
        return None
    split = marginals_and_conditionals(omega)
    assert isinstance(split, NonSignalling), "rank-one normalized tables are non-signalling"
    assert product_weight(split.first, split.second, omega.left, omega.right) == omega
    return split.first, split.second


def is_full(A: ProbModel) -> bool:
    return A.full or set(full_weight_polytope_vertices(A.space)) <= set(A.generators)


def _ns_system(A: ProbModel, B: ProbModel) -> tuple[LinearSystem, tuple]:
    """H-description of the minimal composite's states over the outcome pairs.

    Normalization on product tests and marginal consistency give the
    non-signalling weights; for a part with a restricted state space every
    slice is also constrained to the cone over that part's states.
    """
    XA, XB = A.outcomes, B.outcomes
    pairs = tuple((x, y) for x in XA for y in XB)
    pos = {p: i for i, p in enumerate(pairs)}
    dim = len(pairs)

    def row(entries: Mapping[tuple, Fraction]) -> tuple[Fraction, ...]:
        r = [ZERO] * dim
        for p, v in entries.items():
            r[pos[p]] += v
        return tuple(r)

    eqs = []
    for E in A.space.tests:
        for F in B.space.tests:
            eqs.append((row({(x, y): ONE for x in E for y in F}), ONE))
    for x in XA:
        for F1, F2 in zip(B.space.tests, B.space.tests[1:]):
            eqs.append((row({**{(x, y): ONE for y in F1 - F2}, **{(x, y): -ONE for y in F2 - F1}}), ZERO))
    for y in XB:
        for E1, E2 in zip(A.space.tests, A.space.tests[1:]):
            eqs.append((row({**{(x, y): ONE for x in E1 - E2}, **{(x, y): -ONE for x in E2 - E1}}), ZERO))
    ineqs = [(row({p: -ONE}), ZERO) for p in pairs]
    if not is_full(B):
        equalities, facets = state_cone(B)
        for x in XA:
            eqs += [(row({(x, y): n[j] for j, y in enumerate(XB)}), ZERO) for n in equalities]
            ineqs += [(row({(x, y): -c[j] for j, y in enumerate(XB)}), ZERO) for c in facets]
    if not is_full(A):
        equalities, facets = state_cone(A)
        for y in XB:
            eqs += [(row({(x, y): n[i] for i, x in enumerate(XA)}), ZERO) for n in equalities]
            ineqs += [(row({(x, y): -c[i] for i, x in enumerate(XA)}), ZERO) for c in facets]
    return LinearSystem(dim, tuple(eqs), tuple(ineqs)), pairs


def in_ns_state_space(A: ProbModel, B: ProbModel, omega: Mapping) -> bool:
    """Non-signalling with every conditional state in the respective part's state space."""
    try:
        omega = as_joint(omega, A, B)
    except (ValueError, TypeError):
        return False
    if not marginals_and_conditionals(omega):
        return False
    rows = all(
        B.contains_subnormalized(Weight({y: omega[(x, y)] for y in B.outcomes})) for x in A.outcomes
    )
    return rows and all(
        A.contains_subnormalized(Weight({x: omega[(x, y)] for x in A.outcomes})) for y in B.outcomes
    )


@lru_cache(maxsize=64)
def ns_model(A: ProbModel, B: ProbModel) -> ProbModel:
    """``A x_NS B`` with generators from vertex enumeration of its H-description."""
    system, pairs = _ns_system(A, B)
    return ProbModel(product_space(A, B), [Weight(zip(pairs, v)) for v in enumerate_vertices(system)])


@dataclass(frozen=True)
class Composite:
    """Parts, a joint model, and the map ``pi`` from the minimal composite into it."""

    left: ProbModel
    right: ProbModel
    total: ProbModel
    pi: Morphism
    locally_tomographic: bool | None = None
    strong: bool | None = None

    def restrict(self, omega: Mapping) -> JointWeight:
        """``pi*(omega)`` as a joint weight on the parts."""
        return JointWeight(pullback_weight(self.pi, omega), self.left.space, self.right.space)


def check_composite(A: ProbModel, B: ProbModel, AB: ProbModel, pi: Morphism) -> Composite:
    """Validate ``pi`` and decide local tomography and strength."""
    if pi.source != ns_model(A, B) or pi.target != AB:
        raise DomainError("pi must map the minimal composite of the parts into the joint model")
    images = [pi(p) for p in pi.source.outcomes]
    positive = all(images)
    injective = len(set(images)) == len(images)
    test_preserving = all(AB.space.is_test(pi.image(E)) for E in pi.source.space.tests)
    if not (positive and injective and test_preserving):
        raise DomainError("pi must be positive, injective and test-preserving")
    outcomes = pi.source.outcomes
    gens = AB.matrix()
    pulled = [pullback_weight(pi, g).vector(outcomes) for g in AB.generators]
    if gens:
        diffs = [tuple(a - b for a, b in zip(g, gens[0])) for g in gens[1:]]
        pdiffs = [tuple(a - b for a, b in zip(g, pulled[0])) for g in pulled[1:]]
        tomographic = rank(pdiffs) == rank(diffs)
    else:
        tomographic = True
    strong = all(
        bool(hull_membership(product_weight(a, b, A, B).vector(outcomes), pulled))
        for a in A.generators
        for b in B.generators
    )
    return Composite(A, B, AB, pi, tomographic, strong)


def make_composite(A: ProbModel, B: ProbModel, AB: ProbModel, mapping: Mapping | None = None) -> Composite:
    """Build ``pi`` from ``mapping`` (default ``(x, y) -> {(x, y)}``) and check the composite."""
    source = ns_model(A, B)
    if mapping is None:
        mapping = {p: {p} for p in source.outcomes}
    return check_composite(A, B, AB, check_morphism(source, AB, mapping))


def minimal_ns_composite(A: ProbModel, B: ProbModel) -> Composite:
    model = ns_model(A, B)
    return check_composite(A, B, model, identity(model))


def separable_generators(A: TestSpace | ProbModel, B: TestSpace | ProbModel) -> list[JointWeight]:
    """Products of extreme weights, in lexicographic order of the factor vectors."""
    MA, MB = _space(A), _space(B)
    return [
        product_weight(v, w, MA, MB)
        for v in full_weight_polytope_vertices(MA)
        for w in full_weight_polytope_vertices(MB)
    ]


def is_separable_weight(
    omega: Mapping, A: TestSpace | ProbModel | None = None, B: TestSpace | ProbModel | None = None
) -> Member | NotMember:
    """Membership in the hull of products of extreme weights (indices follow :func:`separable_generators`)."""
    if A is None or B is None:
        if not isinstance(omega, JointWeight):
            raise DomainError("pass the factor spaces or a JointWeight")
        A, B = omega.left, omega.right
    omega = as_joint(omega, A, B)
    outcomes = product_space(A, B).outcomes
    gens = [g.vector(outcomes) for g in separable_generators(A, B)]
    return hull_membership(omega.vector(outcomes), gens)


def preparable_products(C: Composite) -> list[JointWeight]:
    """Product states lying in ``pi*(Omega(AB))``.

    Candidates are products of generator states plus restricted generators
    that already factor; only those passing the preparability LP are kept.
    """
    return list(_preparable_products(C))


@lru_cache(maxsize=64)
def _preparable_products(C: Composite) -> tuple[JointWeight, ...]:
    outcomes = C.pi.source.outcomes
    restricted = [C.restrict(g) for g in C.total.generators]
    pulled = [r.vector(outcomes) for r in restricted]
    candidates = {product_weight(a, b, C.left, C.right) for a in C.left.generators for b in C.right.generators}
    candidates |= {r for r in restricted if product_factors(r) is not None}
    keep = [c for c in candidates if hull_membership(c.vector(outcomes), pulled)]
    return tuple(sorted(keep, key=lambda w: w.vector(outcomes)))


def is_separable_state(C: Composite, omega: Mapping) -> Member | NotMember:
    """Is ``pi*(omega)`` a mixture of preparable product states?"""
    if not C.total.contains(omega):
        raise DomainError("not a state of the joint model")
    outcomes = C.pi.source.outcomes
    gens = [p.vector(outcomes) for p in preparable_products(C)]
    return hull_membership(C.restrict(omega).vector(outcomes), gens)
