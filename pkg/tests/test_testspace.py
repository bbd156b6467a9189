from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from probmodels.errors import DomainError, StructuralError
from probmodels.fixtures import SQUARE, TRIANGLE
from probmodels.testspace import (
    TestSpace,
    are_orthogonal,
    are_perspective,
    count_single_outcome_tests,
    is_event,
    is_irredundant,
    is_semiclassical,
    label,
    sort_key,
)
from probmodels.weights import full_weight_polytope_vertices
from strategies import semiclassical_spaces, subsets, spaces


def brute_perspective(M: TestSpace, a: frozenset, b: frozenset) -> bool:
    """Search every subset of outcomes for a common complement."""
    tests = set(M.tests)
    return any(
        not (c & a) and not (c & b) and (a | c) in tests and (b | c) in tests for c in subsets(M.outcomes)
    )


class TestConstruction:
    def test_outcomes_are_the_union(self):
        M = TestSpace([["b", "a"], ["c"]])
        assert M.outcomes == ("a", "b", "c")
        assert M.tests == (frozenset("ab"), frozenset("c"))

    def test_duplicate_tests_collapse(self):
        assert TestSpace([["a", "b"], ["b", "a"]]).tests == (frozenset("ab"),)

    @pytest.mark.parametrize("tests", [[], [[]], [["a"], []]])
    def test_rejects_empty(self, tests):
        with pytest.raises(StructuralError):
            TestSpace(tests)

    def test_declared_outcomes_must_match(self):
        with pytest.raises(StructuralError, match="not in any test"):
            TestSpace([["a"]], ["a", "z"])
        with pytest.raises(StructuralError):
            TestSpace([["a"]], ["a", "a"])

    def test_equality_ignores_order(self):
        assert TestSpace([["a", "b"], ["u", "v"]]) == TestSpace([["v", "u"], ["b", "a"]])
        assert hash(TestSpace([["a", "b"]])) == hash(TestSpace([["b", "a"]]))

    def test_unknown_outcome(self):
        with pytest.raises(StructuralError):
            SQUARE.is_event({"z"})

    def test_labels(self):
        assert label(("a", 1)) == "(a,1)"
        assert label(frozenset({2, 0})) == "{0,2}"
        assert sort_key("b") < sort_key(1) < sort_key(("a",)) < sort_key(frozenset())


class TestPredicates:
    @pytest.mark.parametrize(
        "M, a, expected",
        [(SQUARE, {"a", "b"}, True), (SQUARE, {"a", "u"}, False), (SQUARE, set(), True), (TRIANGLE, set(), True)],
    )
    def test_is_event(self, M, a, expected):
        assert is_event(M, a) is expected

    @pytest.mark.parametrize(
        "M, x, y, expected",
        [(SQUARE, "a", "b", True), (SQUARE, "a", "u", False), (TRIANGLE, "a", "c", True)],
    )
    def test_are_orthogonal(self, M, x, y, expected):
        assert are_orthogonal(M, x, y) is expected

    def test_orthogonality_needs_distinct_outcomes(self):
        with pytest.raises(DomainError):
            are_orthogonal(SQUARE, "a", "a")

    @pytest.mark.parametrize(
        "tests, a, b, expected",
        [
            ([["a", "b"], ["a", "c"]], {"b"}, {"c"}, True),
            ([["a", "b"], ["c", "d"]], {"b"}, {"d"}, False),
            ([["a", "b"], ["c", "d"]], {"a", "b"}, {"c", "d"}, True),
        ],
    )
    def test_are_perspective(self, tests, a, b, expected):
        assert are_perspective(TestSpace(tests), a, b) is expected

    def test_perspectivity_needs_events(self):
        with pytest.raises(DomainError):
            are_perspective(SQUARE, {"a", "u"}, {"a"})

    @pytest.mark.parametrize(
        "tests, expected",
        [([["a", "b"], ["u", "v"]], True), ([["a"], ["a", "b"]], False), (TRIANGLE.tests, True)],
    )
    def test_is_irredundant(self, tests, expected):
        assert is_irredundant(TestSpace(tests)) is expected

    @pytest.mark.parametrize(
        "tests, expected", [([["a", "b"], ["u", "v"]], True), (TRIANGLE.tests, False), ([["x", "y", "z"]], True)]
    )
    def test_is_semiclassical(self, tests, expected):
        assert is_semiclassical(TestSpace(tests)) is expected

    @pytest.mark.parametrize("tests, expected", [([["a", "b"], ["u", "v"]], 0), ([["x"]], 1), ([["x"], ["y"]], 2)])
    def test_count_single_outcome_tests(self, tests, expected):
        assert count_single_outcome_tests(TestSpace(tests)) == expected

    def test_events_of_square(self):
        events = SQUARE.events()
        assert len(events) == 7  # empty, four singletons, two tests
        assert events[0] == frozenset()


class TestPerspectivityProperties:
    @given(spaces(), st.data())
    def test_reflexive_and_symmetric(self, M, data):
        events = M.events()
        a = data.draw(st.sampled_from(events))
        b = data.draw(st.sampled_from(events))
        assert M.are_perspective(a, a)
        assert M.are_perspective(a, b) == M.are_perspective(b, a)

    @given(spaces())
    def test_matches_brute_force(self, M):
        events = M.events()
        for a in events:
            for b in events:
                assert M.are_perspective(a, b) == brute_perspective(M, a, b)

    @given(spaces())
    def test_perspective_events_have_equal_weight(self, M):
        vertices = full_weight_polytope_vertices(M)
        events = M.events()
        for a in events:
            for b in events:
                if M.are_perspective(a, b):
                    assert all(w.total(a) == w.total(b) for w in vertices)

    @given(semiclassical_spaces(max_tests=3, max_size=3))
    def test_semiclassical_reduces_to_same_test(self, M):
        events = M.events()
        for a in events:
            for b in events:
                same = a == b or (a in M.tests and b in M.tests)
                assert M.are_perspective(a, b) == same == brute_perspective(M, a, b)
