"""The eight acceptance criteria, one test each.

Run ``pytest tests/test_acceptance.py`` to get one PASS/FAIL line per
criterion in the terminal summary.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from probmodels.bell import build_pr_box, check_bell_local, local_implies_separable_check
from probmodels.classicalize import Measure, barycenter_measure, bor_on_morphism, borelify, lift_weight
from probmodels.composites import (
    JointWeight,
    NonSignalling,
    Signalling,
    is_separable_weight,
    marginals_and_conditionals,
    product_space,
    separable_generators,
)
from probmodels.errors import HypothesisViolation
from probmodels.exactlp import NotMember, hull_membership, solve_feasibility
from probmodels.fixtures import (
    FUNCTOR_F,
    FUNCTOR_G,
    GOLDEN_COMMANDS,
    PAIR,
    PR_SQUARE,
    SQUARE,
    SQUARE_B,
    TRIANGLE,
    TRIT_C,
    composites,
    golden_output,
)
from probmodels.morphisms import check_morphism, classify, compose, identity
from probmodels.testspace import TestSpace
from probmodels.weights import (
    ProbModel,
    convex_combination,
    enumerate_dispersion_free,
    full_weight_polytope_vertices,
    make_full_model,
)
from oracles import grid_feasible, grid_member, random_feasibility, random_hull
from roundtrip import DOCUMENTS, FIXTURES, reserialize
from universal import apex_family, check_universal_property, subquotient_family

criterion = pytest.mark.criterion
HALF = Fraction(1, 2)


def random_semiclassical(rng: random.Random) -> TestSpace:
    sizes = [rng.randint(1, 4) for _ in range(rng.randint(1, 4))]
    tests, k = [], 0
    for s in sizes:
        tests.append([f"o{k + i}" for i in range(s)])
        k += s
    return TestSpace(tests)


def random_space(rng: random.Random, singles_allowed: int) -> TestSpace:
    """At most three overlapping tests over five labels, with a bounded number of singletons."""
    while True:
        pool = [f"o{i}" for i in range(5)]
        tests = [rng.sample(pool, rng.randint(1, 3)) for _ in range(rng.randint(1, 3))]
        M = TestSpace(tests)
        singles = sum(len(E) == 1 for E in M.tests)
        if (singles <= 1) == (singles_allowed <= 1) and full_weight_polytope_vertices(M):
            return M


def random_model(rng: random.Random, singles_allowed: int = 1) -> ProbModel:
    M = random_space(rng, singles_allowed)
    if rng.random() < 0.3:
        return make_full_model(M)
    vertices = full_weight_polytope_vertices(M)
    gens = []
    for _ in range(rng.randint(1, 3)):
        picks = [rng.choice(vertices) for _ in range(rng.randint(1, 3))]
        raw = [rng.randint(1, 4) for _ in picks]
        gens.append(convex_combination((Fraction(r, sum(raw)), v) for r, v in zip(raw, picks)))
    return ProbModel(M, gens)


def assert_borelification(A: ProbModel) -> None:
    bor = borelify(A)
    assert classify(bor.quotient).quotient
    assert classify(bor.embedding).embedding
    for alpha in A.generators:
        lifted = lift_weight(alpha, A.space)
        mu = barycenter_measure(bor.borel, lifted)
        assert isinstance(mu, Measure)
        for y in bor.cover.outcomes:
            (block,) = bor.embedding(y)
            assert alpha[y.base] == lifted[y] == mu[block]


@criterion(1, "dispersion-free weights are the vertices on 50 random semiclassical spaces")
def test_criterion_1_dispersion_free_vertices():
    rng = random.Random(101)
    for _ in range(50):
        M = random_semiclassical(rng)
        assert set(enumerate_dispersion_free(M)) == set(full_weight_polytope_vertices(M)), M


@criterion(2, "Borelification of square, triangle and 20 random models; hypothesis violations rejected")
def test_criterion_2_borelification():
    square, triangle = make_full_model(SQUARE), make_full_model(TRIANGLE)
    assert len(borelify(square).points) == 4 and len(borelify(triangle).points) == 8
    assert_borelification(square)
    assert_borelification(triangle)
    rng = random.Random(202)
    for _ in range(20):
        assert_borelification(random_model(rng))
    for _ in range(5):
        bad = random_model(rng, singles_allowed=2)
        with pytest.raises(HypothesisViolation) as info:
            borelify(bad)
        assert len(info.value.witness) >= 2 and all(len(t) == 1 for t in info.value.witness)


@criterion(3, "pullbacks of sub-quotients satisfy the universal property over all cones")
def test_criterion_3_universal_property():
    family = subquotient_family()
    assert len(family) >= 5
    total = sum(check_universal_property(sq, apex_family()) for sq in family)
    assert total > 0


@criterion(4, "Bor preserves identities and composition")
def test_criterion_4_functor_laws():
    pair, square_b, trit_c = make_full_model(PAIR), make_full_model(SQUARE_B), make_full_model(TRIT_C)
    f = check_morphism(pair, square_b, FUNCTOR_F)
    g = check_morphism(square_b, trit_c, FUNCTOR_G)
    assert classify(f).test_preserving and classify(g).test_preserving
    for model in (pair, square_b, trit_c):
        assert bor_on_morphism(identity(model)) == identity(borelify(model).borel)
    assert bor_on_morphism(compose(g, f)) == compose(bor_on_morphism(g), bor_on_morphism(f))


@criterion(5, "PR box is the even mixture of two signalling tables and is entangled")
def test_criterion_5_pr_box():
    box = build_pr_box()
    assert box.box == {k: (box.omega[k] + box.omega_prime[k]) / 2 for k in box.box}
    for component, values in ((box.omega, (0, 1)), (box.omega_prime, (1, 0))):
        got = marginals_and_conditionals(component)
        assert isinstance(got, Signalling)
        assert got.witness.outcome == "u" and got.witness.values == values
    got = marginals_and_conditionals(box.box)
    assert isinstance(got, NonSignalling)
    assert set(got.first.values()) == {HALF} == set(got.second.values())
    verdict = is_separable_weight(box.box)
    assert isinstance(verdict, NotMember)
    outcomes = product_space(PR_SQUARE, PR_SQUARE).outcomes
    gens = [g.vector(outcomes) for g in separable_generators(PR_SQUARE, PR_SQUARE)]
    assert verdict.verify(box.box.vector(outcomes), gens)


@criterion(6, "Bell-local composites have separable restrictions; PR-box composites are not local")
def test_criterion_6_local_implies_separable():
    box = build_pr_box().box
    with_box = 0
    for name, C in composites().items():
        verdict = check_bell_local(C)
        if verdict.local:
            report = local_implies_separable_check(C)
            assert all(is_separable_weight(d.restriction) for d in report.decompositions), name
        if (C.left.space, C.right.space) != (PR_SQUARE, PR_SQUARE):
            continue
        outcomes = C.pi.source.outcomes
        restricted = [C.restrict(g).vector(outcomes) for g in C.total.generators]
        if hull_membership(JointWeight(box, PR_SQUARE, PR_SQUARE).vector(outcomes), restricted):
            with_box += 1
            assert not verdict.local, name
            df_signalling = [
                w
                for w in verdict.witnesses
                if w.signalling and w.restriction is not None and set(w.restriction.values()) <= {0, 1}
            ]
            assert df_signalling, name
    assert with_box >= 2


@criterion(7, "exact LP kernel agrees with a rational grid oracle on 200 instances of each kind")
def test_criterion_7_grid_oracle():
    rng = random.Random(707)
    disagreements = 0
    for _ in range(200):
        instance = random_feasibility(rng)
        disagreements += bool(solve_feasibility(instance.system)) != grid_feasible(instance)
    for _ in range(200):
        instance = random_hull(rng)
        disagreements += bool(hull_membership(instance.point, instance.generators)) != grid_member(instance)
    assert disagreements == 0


@criterion(8, "fixtures round-trip and CLI runs are byte-identical")
def test_criterion_8_round_trip_and_determinism():
    for name in DOCUMENTS:
        assert reserialize(name) == (FIXTURES / name).read_text(encoding="utf-8"), name
    for argv in GOLDEN_COMMANDS.values():
        first, second = golden_output(FIXTURES, argv), golden_output(FIXTURES, argv)
        assert first == second, argv
