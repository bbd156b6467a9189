"""Morphisms of test spaces and of probabilistic models.

A morphism sends each source outcome to an event of the target.  It must
carry events to events, orthogonal outcomes to orthogonal events, and
perspective events to perspective events.  A model morphism must also pull
every target state back to a (possibly sub-normalized) source state.

Targets are duck-typed: anything with ``space`` (providing ``is_event``,
``is_test``, ``orthogonal_events``, ``are_perspective`` and ``tests``),
``generators`` and ``contains_subnormalized`` works.  Finite Borel models from
:mod:`probmodels.classicalize` plug in this way, and may expose two optional
hooks that decide the state conditions without listing generators:
``pullbacks_are_states(mapping, source)`` and
``state_preimage_exists(mapping, alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Iterable, Mapping

from .errors import DomainError, MorphismViolation, StructuralError
from .exactlp import hull_membership
from .testspace import Outcome, TestSpace, label, sort_key
from .weights import ProbModel, Weight


def _union(events: Iterable[frozenset]) -> frozenset:
    return frozenset().union(*events)


class Morphism:
    """An event-valued map between models.  Build through :func:`check_morphism`."""

    __slots__ = ("source", "target", "mapping", "_hash")

    def __init__(self, source: Any, target: Any, mapping: Mapping[Outcome, Iterable[Outcome]]) -> None:
        self.source = source
        self.target = target
        missing = [x for x in source.outcomes if x not in mapping]
        if missing:
            raise StructuralError(f"map undefined on {[label(x) for x in missing]}")
        extra = set(mapping) - set(source.outcomes)
        if extra:
            raise StructuralError(f"map defined on unknown outcomes {sorted(map(label, extra))}")
        self.mapping = {x: frozenset(mapping[x]) for x in source.outcomes}
        self._hash = hash((source, target, frozenset(self.mapping.items())))

    def __call__(self, x: Outcome) -> frozenset:
        return self.mapping[x]

    def image(self, event: Iterable[Outcome]) -> frozenset:
        return _union(self.mapping[x] for x in event)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Morphism)
            and self.mapping == other.mapping
            and self.source == other.source
            and self.target == other.target
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{label(x)} -> {label(v)}" for x, v in self.mapping.items())
        return f"Morphism({body})"


def pullback_weight(phi: Morphism, beta: Mapping[Outcome, Any]) -> Weight:
    """``phi*(beta)(x) = sum of beta over phi(x)``."""
    return Weight({x: sum((beta[y] for y in phi(x)), 0) for x in phi.source.outcomes})


def _check_conditions(phi: Morphism, strict: bool) -> None:
    src: TestSpace = phi.source.space
    tgt = phi.target.space
    for x in phi.source.outcomes:
        if not tgt.is_event(phi(x)):
            raise MorphismViolation("i", f"image of {label(x)} is not an event", (frozenset([x]), phi(x)))
    for E in src.tests:
        if not tgt.is_event(phi.image(E)):
            raise MorphismViolation("i", f"image of test {label(E)} is not an event", (E, phi.image(E)))
    for E in src.tests:
        for x, y in combinations(sorted(E, key=sort_key), 2):
            if not tgt.orthogonal_events(phi(x), phi(y)):
                raise MorphismViolation(
                    "ii", f"{label(x)} and {label(y)} are orthogonal but their images are not", (x, y, phi(x), phi(y))
                )
    pairs: Iterable[tuple[frozenset, frozenset]]
    if strict:
        events = src.events()
        pairs = ((a, b) for a, b in combinations(events, 2) if src.are_perspective(a, b))
    else:
        pairs = combinations(src.tests, 2)
    for a, b in pairs:
        if not tgt.are_perspective(phi.image(a), phi.image(b)):
            raise MorphismViolation(
                "iii",
                f"{label(a)} ~ {label(b)} but their images are not perspective",
                (a, b, phi.image(a), phi.image(b)),
            )


def _check_states(phi: Morphism) -> None:
    hook = getattr(phi.target, "pullbacks_are_states", None)
    if hook is not None and hook(phi.mapping, phi.source):
        return
    for beta in phi.target.generators:
        pulled = pullback_weight(phi, beta)
        if not phi.source.contains_subnormalized(pulled):
            raise MorphismViolation("pm", "a target state pulls back outside the source states", (beta, pulled))


def check_morphism(
    source: Any, target: Any, mapping: Mapping[Outcome, Iterable[Outcome]], *, strict: bool = False
) -> Morphism:
    """Validate ``mapping`` as a model morphism, raising :class:`MorphismViolation` on failure.

    Perspectivity is checked on pairs of tests by default; ``strict`` checks
    every pair of perspective events instead.
    """
    phi = Morphism(source, target, mapping)
    _check_conditions(phi, strict)
    _check_states(phi)
    return phi


def identity(model: Any) -> Morphism:
    return Morphism(model, model, {x: frozenset([x]) for x in model.outcomes})


def compose(psi: Morphism, phi: Morphism) -> Morphism:
    """``psi after phi``: each outcome goes to the union of ``psi`` over ``phi(x)``."""
    if phi.target != psi.source:
        raise DomainError("cannot compose: codomain of the first map is not the domain of the second")
    return Morphism(phi.source, psi.target, {x: psi.image(phi(x)) for x in phi.source.outcomes})


@dataclass(frozen=True)
class MorphismClass:
    test_preserving: bool
    positive: bool
    outcome_preserving: bool
    injective: bool
    surjective: bool
    interpretation: bool
    embedding: bool
    quotient: bool


def _outcome_count(space: Any) -> int:
    count = getattr(space, "outcome_count", None)
    return count if count is not None else len(space.outcomes)


def _pullbacks_are_states(phi: Morphism) -> bool:
    hook = getattr(phi.target, "pullbacks_are_states", None)
    if hook is not None and hook(phi.mapping, phi.source):
        return True
    return all(phi.source.contains(pullback_weight(phi, b)) for b in phi.target.generators)


def _states_are_pullbacks(phi: Morphism) -> bool:
    hook = getattr(phi.target, "state_preimage_exists", None)
    if hook is not None:
        answer = hook(phi.mapping, phi.source)
        if answer is not None:
            return answer
    outcomes = phi.source.outcomes
    pulled = [pullback_weight(phi, b).vector(outcomes) for b in phi.target.generators]
    return all(bool(hull_membership(a.vector(outcomes), pulled)) for a in phi.source.generators)


def classify(phi: Morphism) -> MorphismClass:
    """Decide every classification flag exactly."""
    src = phi.source
    tgt_space = phi.target.space
    test_preserving = all(tgt_space.is_test(phi.image(E)) for E in src.space.tests)
    positive = all(phi(x) for x in src.outcomes)
    outcome_preserving = all(len(phi(x)) == 1 for x in src.outcomes)
    images = [phi(x) for x in src.outcomes]
    injective = len(set(images)) == len(images)
    surjective = False
    if outcome_preserving and len(set(images)) == _outcome_count(tgt_space):
        image_tests = {phi.image(E) for E in src.space.tests}
        surjective = all(F in image_tests for F in tgt_space.tests)
    embedding = (
        outcome_preserving
        and injective
        and test_preserving
        and _pullbacks_are_states(phi)
        and _states_are_pullbacks(phi)
    )
    return MorphismClass(
        test_preserving=test_preserving,
        positive=positive,
        outcome_preserving=outcome_preserving,
        injective=injective,
        surjective=surjective,
        interpretation=positive and test_preserving,
        embedding=embedding,
        quotient=outcome_preserving and test_preserving and surjective,
    )


@dataclass(frozen=True)
class Explanation:
    """A span ``A <- C -> B``: a quotient of ``C`` onto ``A`` and an embedding of ``C`` into ``B``."""

    apex: Any
    quotient_leg: Morphism
    embedding_leg: Morphism

    def __post_init__(self) -> None:
        if self.quotient_leg.source != self.apex or self.embedding_leg.source != self.apex:
            raise DomainError("both legs must start at the apex")

    @property
    def explained(self) -> Any:
        return self.quotient_leg.target

    @property
    def explainer(self) -> Any:
        return self.embedding_leg.target

    def is_valid(self) -> bool:
        return classify(self.quotient_leg).quotient and classify(self.embedding_leg).embedding


def identity_explanation(model: Any) -> Explanation:
    return Explanation(model, identity(model), identity(model))


def _single(event: frozenset) -> Outcome:
    (x,) = event
    return x


def pullback_subquotient(e: Morphism, q: Morphism) -> Explanation:
    """Pull back an embedding ``e: A -> C`` along a quotient ``q: B -> C``.

    The apex keeps the tests of ``B`` whose image under ``q`` is the image of a
    test of ``A``, with states restricted from ``B``.  Its legs are ``e^-1 q``
    onto ``A`` and the inclusion into ``B``.

    Raises :class:`DomainError` when some event of ``B`` over an event of ``A``
    lies in no kept test: then no explanation is a pullback.
    """
    if e.target != q.target:
        raise DomainError("the embedding and the quotient must share a codomain")
    if not classify(e).embedding:
        raise DomainError("first leg is not an embedding")
    if not classify(q).quotient:
        raise DomainError("second leg is not a quotient")
    A, B = e.source, q.source
    e_inverse = {_single(e(x)): x for x in A.outcomes}
    image_tests = {e.image(E) for E in A.space.tests}
    kept = [F for F in B.space.tests if q.image(F) in image_tests]
    for G in B.space.events():
        down = q.image(G)
        if G and down <= e_inverse.keys() and A.space.is_event(e_inverse[z] for z in down):
            if not any(G <= F for F in kept):
                # the cone d -> G over d -> e^-1 q(G) would need a test of B over A containing G
                raise DomainError(
                    f"no pullback: event {label(G)} lies over an event of the embedded model "
                    "but in no test carried onto its tests"
                )
    space = TestSpace(kept)
    restricted = [Weight({y: beta[y] for y in space.outcomes}) for beta in B.generators]
    apex = ProbModel(space, restricted)
    down = check_morphism(apex, A, {y: {e_inverse[_single(q(y))]} for y in space.outcomes})
    inclusion = check_morphism(apex, B, {y: {y} for y in space.outcomes})
    return Explanation(apex, down, inclusion)


def compose_explanations(first: Explanation, second: Explanation) -> Explanation:
    """Compose an explanation of ``A`` by ``B`` with one of ``B`` by ``D``."""
    if first.explainer != second.explained:
        raise DomainError("the middle models of the two explanations differ")
    middle = pullback_subquotient(first.embedding_leg, second.quotient_leg)
    return Explanation(
        middle.apex,
        compose(first.quotient_leg, middle.quotient_leg),
        compose(second.embedding_leg, middle.embedding_leg),
    )
