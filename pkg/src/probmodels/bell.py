"""Bell locality of classical embeddings, and the PR box.

An embedding of the cover of a joint model into a finite classical model is
Bell-local when every point mass pulls back to a state whose restriction to
the parts is a product.  For the canonical embedding this depends only on the
test spaces.  When it holds, each state's restriction is an explicit finite
mixture of products, hence separable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .classicalize import borelify, cover_space, lift_weight
from .composites import (
    Composite,
    JointWeight,
    Signalling,
    is_separable_weight,
    marginals_and_conditionals,
    minimal_ns_composite,
    nonzero_minor,
    product_factors,
    product_weight,
)
from .errors import DomainError
from .exactlp import ONE, ZERO, HullCertificate, Member, _phase_one
from .fixtures import HALF, PR_SQUARE, _joint
from .morphisms import Morphism
from .testspace import Outcome
from .weights import Weight, convex_combination, make_full_model


@dataclass(frozen=True)
class BellWitness:
    """Point ``point`` whose pulled-back weight does not restrict to a product.

    ``minor`` is ``(x, x', y, y', det)`` with ``det != 0``; it is None when the
    pulled-back cover weight depends on the context and so is not a weight on
    the joint model at all.
    """

    point: int
    restriction: JointWeight | None
    minor: tuple | None
    signalling: bool


@dataclass(frozen=True)
class BellVerdict:
    local: bool
    witnesses: tuple[BellWitness, ...]
    factorization: dict

    def __bool__(self) -> bool:
        return self.local


def _default_embedding(C: Composite) -> Morphism:
    return borelify(C.total).embedding


def _validated(C: Composite, emb: Morphism | None) -> Morphism:
    if emb is None:
        return _default_embedding(C)
    if emb.source.space != cover_space(C.total.space):
        raise DomainError("the embedding must start at the cover of the joint model")
    if not hasattr(emb.target.space, "size"):
        raise DomainError("the embedding must land in a finite Borel model")
    images = [emb(x) for x in emb.source.outcomes]
    if not all(len(b) == 1 for b in images) or len(set(images)) != len(images):
        raise DomainError("not a test-space embedding: outcomes must go to distinct single blocks")
    if not all(emb.target.space.is_test(emb.image(E)) for E in emb.source.space.tests):
        raise DomainError("not a test-space embedding: some test does not go to a partition")
    return emb


def point_pullback(emb: Morphism, point: int) -> Weight:
    """``emb*(delta_point)`` on the cover."""
    return Weight({x: ONE if any(point in b for b in emb(x)) else ZERO for x in emb.source.outcomes})


def _drop(C: Composite, cover_weight: Weight) -> Weight | None:
    """The weight on the joint model whose lift is ``cover_weight``, if any."""
    values: dict[Outcome, Fraction] = {}
    for xe, v in cover_weight.items():
        if values.setdefault(xe.base, v) != v:
            return None
    return Weight(values)


def check_bell_local(C: Composite, emb: Morphism | None = None) -> BellVerdict:
    """Test every point of the classical model for a product restriction."""
    emb = _validated(C, emb)
    witnesses = []
    factorization = {}
    for s in range(emb.target.space.size):
        gamma = _drop(C, point_pullback(emb, s))
        if gamma is None:
            witnesses.append(BellWitness(s, None, None, True))
            continue
        restriction = C.restrict(gamma)
        factors = product_factors(restriction)
        if factors is None:
            signalling = isinstance(marginals_and_conditionals(restriction), Signalling)
            witnesses.append(BellWitness(s, restriction, nonzero_minor(restriction), signalling))
        else:
            factorization[s] = factors
    return BellVerdict(not witnesses, tuple(witnesses), factorization)


@dataclass(frozen=True)
class Decomposition:
    """``restriction = sum of measure[s] * factors[s]`` over the support of ``measure``."""

    state: Weight
    measure: tuple[Fraction, ...]
    restriction: JointWeight
    mixture: JointWeight
    certificate: HullCertificate


@dataclass(frozen=True)
class LocalSeparabilityReport:
    verdict: BellVerdict
    decompositions: tuple[Decomposition, ...]


def _pullback_measure(emb: Morphism, lifted: Weight) -> tuple[Fraction, ...]:
    n = emb.target.space.size
    columns = [point_pullback(emb, s) for s in range(n)]
    outcomes = emb.source.outcomes
    A = [[ONE] * n] + [[c[x] for c in columns] for x in outcomes]
    b = [ONE] + [lifted[x] for x in outcomes]
    tab, _ = _phase_one(A, b, n, clean=False)
    if tab is None:
        raise DomainError("state has no representing measure under this embedding")
    return tuple(tab.solution(n))


def local_implies_separable_check(C: Composite, emb: Morphism | None = None) -> LocalSeparabilityReport:
    """Decompose every joint state's restriction as a mixture of products."""
    emb = _validated(C, emb)
    verdict = check_bell_local(C, emb)
    if not verdict.local:
        raise DomainError("the embedding is not Bell-local")
    records = []
    for omega in C.total.generators:
        mu = _pullback_measure(emb, lift_weight(omega, C.total.space))
        terms = [
            (m, product_weight(*verdict.factorization[s], C.left, C.right)) for s, m in enumerate(mu) if m
        ]
        mixture = JointWeight(convex_combination(terms), C.left.space, C.right.space)
        restriction = C.restrict(omega)
        if mixture != restriction:
            raise AssertionError("mixture of point factorizations differs from the restriction")
        separable = is_separable_weight(restriction)
        if not isinstance(separable, Member):
            raise AssertionError("a Bell-local restriction failed the separability LP")
        records.append(Decomposition(omega, mu, restriction, mixture, separable.certificate))
    return LocalSeparabilityReport(verdict, tuple(records))


@dataclass(frozen=True)
class PRBox:
    composite: Composite
    box: JointWeight
    omega: JointWeight
    omega_prime: JointWeight


def build_pr_box() -> PRBox:
    """The two signalling dispersion-free tables and their even mixture."""
    omega = JointWeight(
        _joint(PR_SQUARE, PR_SQUARE, [("x", "x"), ("x", "u"), ("u", "x"), ("u", "v")]), PR_SQUARE, PR_SQUARE
    )
    omega_prime = JointWeight(
        _joint(PR_SQUARE, PR_SQUARE, [("y", "y"), ("y", "v"), ("v", "y"), ("v", "u")]), PR_SQUARE, PR_SQUARE
    )
    box = JointWeight(convex_combination([(HALF, omega), (HALF, omega_prime)]), PR_SQUARE, PR_SQUARE)
    part = make_full_model(PR_SQUARE)
    return PRBox(minimal_ns_composite(part, part), box, omega, omega_prime)
