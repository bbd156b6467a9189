from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, permutations, product

import pytest
from hypothesis import given, strategies as st

from oracles import grid_feasible, grid_member, random_feasibility, random_hull
from probmodels.errors import StructuralError, UnboundedError
from probmodels.exactlp import (
    Feasible,
    Infeasible,
    LinearSystem,
    Member,
    NotMember,
    dot,
    enumerate_vertices,
    hull_membership,
    nullspace,
    rank,
    solve_feasibility,
    to_fraction,
)

F = Fraction
small = st.builds(Fraction, st.integers(-4, 4), st.sampled_from([1, 2, 3, 4]))


def box(d: int, lo=0, hi=1) -> list:
    rows = []
    for i in range(d):
        e = tuple(1 if k == i else 0 for k in range(d))
        rows.append((tuple(-v for v in e), -lo))
        rows.append((e, hi))
    return rows


def _solve_square(rows: list[tuple], rhs: list[Fraction]) -> tuple | None:
    """Cramer's rule with Leibniz determinants; independent of the kernel's elimination."""
    n = len(rows)

    def det(m):
        total = Fraction(0)
        for perm in permutations(range(n)):
            sign = 1
            for i, j in combinations(range(n), 2):
                if perm[i] > perm[j]:
                    sign = -sign
            term = Fraction(sign)
            for i in range(n):
                term *= m[i][perm[i]]
            total += term
        return total

    D = det(rows)
    if D == 0:
        return None
    out = []
    for c in range(n):
        m = [list(r) for r in rows]
        for i in range(n):
            m[i][c] = rhs[i]
        out.append(det(m) / D)
    return tuple(out)


def brute_vertices(system: LinearSystem) -> set[tuple]:
    """Basic feasible solutions: solve every choice of ``d`` rows as equations."""
    rows = list(system.equalities) + list(system.inequalities)
    found = set()
    for subset in combinations(rows, system.dimension):
        point = _solve_square([r for r, _ in subset], [b for _, b in subset])
        if point is not None and system.satisfied_by(point):
            found.add(point)
    return found


class TestConversions:
    @pytest.mark.parametrize(
        "value, expected",
        [(3, F(3)), ("3/4", F(3, 4)), ("-2/6", F(-1, 3)), (" 1 / 2 ", F(1, 2)), (F(5, 7), F(5, 7))],
    )
    def test_exact_inputs(self, value, expected):
        assert to_fraction(value) == expected

    @pytest.mark.parametrize("value", [0.5, True, None, "0.5", "1e3", "1/2/3", "inf"])
    def test_rejects_inexact(self, value):
        with pytest.raises((TypeError, ValueError)):
            to_fraction(value)

    def test_fractions_are_lowest_terms(self):
        f = to_fraction("6/8")
        assert (f.numerator, f.denominator) == (3, 4)

    def test_rank_and_nullspace(self):
        rows = [(F(1), F(2), F(3)), (F(2), F(4), F(6)), (F(0), F(1), F(1))]
        assert rank(rows) == 2
        (v,) = nullspace(rows, 3)
        assert all(dot(r, v) == 0 for r in rows)

    def test_malformed_system(self):
        with pytest.raises(StructuralError):
            LinearSystem(2, equalities=((F(1),),))
        with pytest.raises(StructuralError):
            LinearSystem(0)
        with pytest.raises(StructuralError):
            LinearSystem(2, equalities=(((1, 2, 3), 0),))


class TestFeasibility:
    def test_contradictory_bounds(self):
        # x >= 1 and x <= 0
        system = LinearSystem(1, inequalities=(((-1,), -1), ((1,), 0)))
        result = solve_feasibility(system)
        assert isinstance(result, Infeasible)
        assert result.certificate.verify(system)

    def test_simplex_point(self):
        system = LinearSystem(2, equalities=(((1, 1), 1),), inequalities=(((-1, 0), 0), ((0, -1), 0)))
        result = solve_feasibility(system)
        assert isinstance(result, Feasible)
        assert system.satisfied_by(result.point)

    def test_triangle_cover_barycenter(self):
        # 8 points = one outcome from each of the three disjoint tests; barycenter 1/2 everywhere
        points = list(product(range(2), repeat=3))
        eqs = [(tuple([1] * 8), 1)]
        for test in range(3):
            for choice in range(2):
                eqs.append((tuple(int(p[test] == choice) for p in points), F(1, 2)))
        ineqs = [(tuple(-int(k == i) for k in range(8)), 0) for i in range(8)]
        system = LinearSystem(8, tuple(eqs), tuple(ineqs))
        assert system.satisfied_by(tuple([F(1, 8)] * 8))
        result = solve_feasibility(system)
        assert isinstance(result, Feasible) and system.satisfied_by(result.point)

    def test_free_variables_and_equalities(self):
        system = LinearSystem(2, equalities=(((1, -1), 3),), inequalities=(((1, 1), -5),))
        result = solve_feasibility(system)
        assert result and system.satisfied_by(result.point)

    def test_inconsistent_equalities(self):
        system = LinearSystem(2, equalities=(((1, 1), 1), ((2, 2), 3)))
        result = solve_feasibility(system)
        assert not result and result.certificate.verify(system)

    @given(
        st.integers(1, 3).flatmap(
            lambda d: st.tuples(
                st.just(d),
                st.lists(st.tuples(st.lists(small, min_size=d, max_size=d), small), max_size=2),
                st.lists(st.tuples(st.lists(small, min_size=d, max_size=d), small), max_size=5),
            )
        )
    )
    def test_certificates_verify(self, data):
        d, eqs, ineqs = data
        system = LinearSystem(d, tuple((tuple(r), b) for r, b in eqs), tuple((tuple(r), b) for r, b in ineqs))
        result = solve_feasibility(system)
        if isinstance(result, Feasible):
            assert system.satisfied_by(result.point)
        else:
            assert result.certificate.verify(system)

    @pytest.mark.parametrize("seed", range(40))
    def test_grid_oracle(self, seed):
        instance = random_feasibility(random.Random(1000 + seed))
        assert bool(solve_feasibility(instance.system)) == grid_feasible(instance)


class TestHullMembership:
    SQUARE = [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_square_center(self):
        result = hull_membership((F(1, 2), F(1, 2)), self.SQUARE)
        assert isinstance(result, Member)
        assert result.certificate.verify((F(1, 2), F(1, 2)), [tuple(map(F, g)) for g in self.SQUARE])

    def test_outside_square(self):
        result = hull_membership((2, 0), self.SQUARE)
        assert isinstance(result, NotMember)
        assert result.verify((F(2), F(0)), [tuple(map(F, g)) for g in self.SQUARE])

    def test_pr_box_against_product_vertices(self):
        # contexts 0 = {x,y}, 1 = {u,v}; a deterministic party picks one outcome per context
        pairs = [(a, b) for a in range(4) for b in range(4)]
        context = lambda k: k // 2

        def deterministic(choice_a, choice_b):
            return tuple(
                int(a % 2 == choice_a[context(a)] and b % 2 == choice_b[context(b)]) for a, b in pairs
            )

        strategies = list(product(range(2), repeat=2))
        gens = [deterministic(ca, cb) for ca in strategies for cb in strategies]
        assert len(set(gens)) == 16

        def pr(a, b):
            # perfectly correlated except anticorrelated on (context 1, context 1)
            agree = (a % 2 == b % 2) != (context(a) == 1 and context(b) == 1)
            return F(1, 2) if agree else F(0)

        box = tuple(pr(a, b) for a, b in pairs)
        result = hull_membership(box, gens)
        assert isinstance(result, NotMember)
        assert result.verify(box, [tuple(map(F, g)) for g in gens])

        # brute force over the 16 vertices: a win-count functional no deterministic table exceeds 3
        def wins(table):
            total = F(0)
            for a, b in pairs:
                if pr(a, b):
                    total += table[pairs.index((a, b))]
            return total

        assert max(wins(g) for g in gens) == 3
        assert wins(box) == 4

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            hull_membership((1, 2), [(1, 2, 3)])

    @given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=6))
    def test_generators_are_members(self, gens):
        for g in gens:
            result = hull_membership(g, gens)
            assert isinstance(result, Member)
            assert result.certificate.verify(tuple(map(F, g)), [tuple(map(F, h)) for h in gens])

    @given(st.lists(st.lists(small, min_size=2, max_size=2), min_size=1, max_size=5), st.lists(small, min_size=2, max_size=2))
    def test_answers_carry_valid_certificates(self, gens, point):
        result = hull_membership(point, gens)
        G = [tuple(map(F, g)) for g in gens]
        p = tuple(map(F, point))
        assert result.certificate.verify(p, G) if result else result.verify(p, G)

    @pytest.mark.parametrize("seed", range(40))
    def test_grid_oracle(self, seed):
        instance = random_hull(random.Random(2000 + seed))
        assert bool(hull_membership(instance.point, instance.generators)) == grid_member(instance)


class TestVertices:
    def test_unit_square(self):
        assert enumerate_vertices(LinearSystem(2, inequalities=tuple(box(2)))) == [
            (0, 0),
            (0, 1),
            (1, 0),
            (1, 1),
        ]

    def test_triangle_weight_polytope(self):
        eqs = (((1, 1, 0), 1), ((0, 1, 1), 1), ((1, 0, 1), 1))
        ineqs = tuple((tuple(-int(k == i) for k in range(3)), 0) for i in range(3))
        assert enumerate_vertices(LinearSystem(3, eqs, ineqs)) == [(F(1, 2), F(1, 2), F(1, 2))]

    def test_single_test(self):
        system = LinearSystem(2, (((1, 1), 1),), (((-1, 0), 0), ((0, -1), 0)))
        assert enumerate_vertices(system) == [(0, 1), (1, 0)]

    def test_empty(self):
        system = LinearSystem(1, inequalities=(((-1,), -1), ((1,), 0)))
        assert enumerate_vertices(system) == []

    def test_ray_is_unbounded(self):
        with pytest.raises(UnboundedError) as info:
            enumerate_vertices(LinearSystem(2, inequalities=(((-1, 0), 0), ((0, -1), 0), ((0, 1), 1))))
        assert info.value.direction[0] > 0 and info.value.direction[1] == 0

    def test_line_is_unbounded(self):
        with pytest.raises(UnboundedError):
            enumerate_vertices(LinearSystem(2, equalities=(((1, 1), 1),)))

    def test_point(self):
        assert enumerate_vertices(LinearSystem(2, equalities=(((1, 0), 2), ((0, 1), 3)))) == [(2, 3)]

    def test_degenerate_pyramid(self):
        # square pyramid: apex lies on four facets
        ineqs = tuple((r + (0,), b) for r, b in box(2)) + (((0, 0, -1), 0),)
        apex = [((-2, 0, 1), 0), ((2, 0, 1), 2), ((0, -2, 1), 0), ((0, 2, 1), 2)]
        system = LinearSystem(3, inequalities=ineqs + tuple(apex))
        vs = enumerate_vertices(system)
        assert (F(1, 2), F(1, 2), F(1)) in vs and len(vs) == 5

    @given(
        st.integers(1, 3).flatmap(
            lambda d: st.tuples(
                st.just(d),
                st.lists(st.tuples(st.lists(st.integers(-2, 2), min_size=d, max_size=d), small), max_size=3),
                st.lists(st.tuples(st.lists(st.integers(-2, 2), min_size=d, max_size=d), small), max_size=1),
            )
        )
    )
    def test_matches_basis_enumeration(self, data):
        d, cuts, eqs = data
        system = LinearSystem(
            d,
            tuple((tuple(r), b) for r, b in eqs),
            tuple(box(d, -1, 1)) + tuple((tuple(r), b) for r, b in cuts),
        )
        vs = enumerate_vertices(system)
        assert set(vs) == brute_vertices(system)
        assert all(system.is_vertex(v) for v in vs)
        assert vs == sorted(vs)

    @given(
        st.integers(2, 3).flatmap(
            lambda d: st.tuples(
                st.just(d),
                st.lists(st.tuples(st.lists(st.integers(-2, 2), min_size=d, max_size=d), small), max_size=3),
            )
        )
    )
    def test_hull_of_vertices_is_the_polytope(self, data):
        d, cuts = data
        system = LinearSystem(d, inequalities=tuple(box(d, -1, 1)) + tuple((tuple(r), b) for r, b in cuts))
        vs = enumerate_vertices(system)
        for k, v in enumerate(vs):
            assert not hull_membership(v, vs[:k] + vs[k + 1 :])
        grid = [F(k, 2) for k in range(-2, 3)]
        for p in product(grid, repeat=d):
            if system.satisfied_by(p):
                assert hull_membership(p, vs)
