"""Exact rational linear programming.

Everything here works over :class:`fractions.Fraction`; there are no
tolerances.  Feasibility and hull membership come with certificates that can be
re-checked by substitution: a point (or convex coefficients) when the answer is
yes, a Farkas multiplier vector (or separating hyperplane) when it is no.

Vertex enumeration uses the double description method on the homogenized
polytope.  Degenerate polytopes (the non-signalling polytope is one) cost no
more than simple ones, and the output is sorted so it is reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import StructuralError, UnboundedError

Vector = tuple[Fraction, ...]
Row = tuple[Vector, Fraction]

_RATIONAL = re.compile(r"\s*[+-]?\d+(\s*/\s*\d+)?\s*")
ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(value: object) -> Fraction:
    """Convert ``value`` to a Fraction, refusing anything inexact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL.fullmatch(value):
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(value.replace(" ", ""))
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def to_vector(values: Iterable[object]) -> Vector:
    return tuple(to_fraction(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), ZERO)


def rank(rows: Iterable[Sequence[Fraction]]) -> int:
    """Exact rank by Gaussian elimination."""
    work = [list(r) for r in rows]
    if not work:
        return 0
    ncols = len(work[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        prow = work[r]
        for i in range(r + 1, len(work)):
            f = work[i][c]
            if f:
                f /= prow[c]
                work[i] = [a - f * b for a, b in zip(work[i], prow)]
        r += 1
        if r == len(work):
            break
    return r


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[Vector]:
    """Basis of ``{c : r . c = 0 for every row r}`` from the reduced row echelon form."""
    work = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        lead = work[r][c]
        work[r] = [a / lead for a in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [ZERO] * ncols
        v[free] = ONE
        for i, c in enumerate(pivots):
            v[c] = -work[i][free]
        basis.append(tuple(v))
    return basis


@dataclass(frozen=True)
class LinearSystem:
    """Constraints ``E x = e`` and ``G x <= g`` on ``dimension`` variables."""

    dimension: int
    equalities: tuple[Row, ...] = ()
    inequalities: tuple[Row, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.dimension, bool) or not isinstance(self.dimension, int) or self.dimension < 1:
            raise StructuralError(f"dimension must be a positive integer, got {self.dimension!r}")
        for name in ("equalities", "inequalities"):
            rows = []
            for k, entry in enumerate(getattr(self, name)):
                try:
                    coeffs, rhs = entry
                except (TypeError, ValueError):
                    raise StructuralError(f"{name}[{k}] is not a (row, rhs) pair") from None
                coeffs = to_vector(coeffs)
                if len(coeffs) != self.dimension:
                    raise StructuralError(
                        f"{name}[{k}] has length {len(coeffs)}, expected {self.dimension}"
                    )
                rows.append((coeffs, to_fraction(rhs)))
            object.__setattr__(self, name, tuple(rows))

    def satisfied_by(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.dimension:
            raise StructuralError("point has the wrong dimension")
        return all(dot(r, point) == b for r, b in self.equalities) and all(
            dot(r, point) <= b for r, b in self.inequalities
        )

    def is_vertex(self, point: Sequence[Fraction]) -> bool:
        """True when ``point`` is feasible and its active constraints have full rank."""
        if not self.satisfied_by(point):
            return False
        active = [r for r, _ in self.equalities]
        active += [r for r, b in self.inequalities if dot(r, point) == b]
        return rank(active) == self.dimension


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers ``u`` (free) and ``v >= 0`` with ``uE + vG = 0`` and ``u.e + v.g < 0``."""

    equality_multipliers: Vector
    inequality_multipliers: Vector

    def verify(self, system: LinearSystem) -> bool:
        u, v = self.equality_multipliers, self.inequality_multipliers
        if len(u) != len(system.equalities) or len(v) != len(system.inequalities):
            return False
        if any(x < 0 for x in v):
            return False
        combo = [ZERO] * system.dimension
        bound = ZERO
        for mult, (row, rhs) in zip(u + v, system.equalities + system.inequalities):
            if mult:
                for i, a in enumerate(row):
                    combo[i] += mult * a
                bound += mult * rhs
        return all(c == 0 for c in combo) and bound < 0


@dataclass(frozen=True)
class Feasible:
    point: Vector

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Infeasible:
    certificate: FarkasCertificate

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class HullCertificate:
    """Convex coefficients ``(generator index, weight)``, all weights positive."""

    coefficients: tuple[tuple[int, Fraction], ...]

    def verify(self, point: Sequence[Fraction], generators: Sequence[Sequence[Fraction]]) -> bool:
        if any(lam <= 0 for _, lam in self.coefficients):
            return False
        if sum((lam for _, lam in self.coefficients), ZERO) != 1:
            return False
        total = [ZERO] * len(point)
        for idx, lam in self.coefficients:
            for k, g in enumerate(generators[idx]):
                total[k] += lam * g
        return tuple(total) == tuple(point)


@dataclass(frozen=True)
class Member:
    certificate: HullCertificate

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotMember:
    """Separating hyperplane: ``normal.g <= offset`` for every generator, ``normal.p > offset``."""

    normal: Vector
    offset: Fraction

    def __bool__(self) -> bool:
        return False

    def verify(self, point: Sequence[Fraction], generators: Sequence[Sequence[Fraction]]) -> bool:
        return all(dot(self.normal, g) <= self.offset for g in generators) and (
            dot(self.normal, point) > self.offset
        )


# --- simplex core -----------------------------------------------------------


class _Tableau:
    """Dense tableau ``B^-1 A | B^-1 b`` for a standard-form system ``A x = b, x >= 0``."""

    __slots__ = ("rows", "rhs", "basis")

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]) -> None:
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def copy(self) -> "_Tableau":
        return _Tableau([r[:] for r in self.rows], self.rhs[:], self.basis[:])

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        p = prow[c]
        if p != 1:
            prow[:] = [v / p if v else v for v in prow]
            self.rhs[r] /= p
        nonzero = [j for j, v in enumerate(prow) if v]
        pr = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nonzero:
                    row[j] -= f * prow[j]
                if pr:
                    self.rhs[i] -= f * pr
        self.basis[r] = c

    def solution(self, n: int) -> list[Fraction]:
        x = [ZERO] * n
        for i, b in enumerate(self.basis):
            if b < n:
                x[b] = self.rhs[i]
        return x


def _minimize(tab: _Tableau, cost: Sequence[Fraction], columns: range) -> None:
    """Bland's rule; assumes a bounded objective (true for phase one)."""
    while True:
        cb = [cost[b] for b in tab.basis]
        basic = set(tab.basis)
        entering = None
        for j in columns:
            if j in basic:
                continue
            reduced = cost[j] - sum((c * row[j] for c, row in zip(cb, tab.rows) if c and row[j]), ZERO)
            if reduced < 0:
                entering = j
                break
        if entering is None:
            return
        best = None
        for i, row in enumerate(tab.rows):
            a = row[entering]
            if a > 0:
                key = (tab.rhs[i] / a, tab.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        assert best is not None, "phase one objective is bounded below"
        tab.pivot(best[1], entering)


def _phase_one(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], n: int, clean: bool = True
) -> tuple[_Tableau | None, list[Fraction] | None]:
    """Find a feasible basis of ``A x = b, x >= 0`` or a Farkas vector.

    On success the tableau has artificial columns stripped and redundant rows
    removed (when ``clean``).  On failure returns ``y`` with ``A^T y <= 0`` and
    ``b.y > 0``.
    """
    m = len(A)
    signs = [ONE if bi >= 0 else -ONE for bi in b]
    rows = []
    for i in range(m):
        s = signs[i]
        rows.append([s * a for a in A[i]] + [ONE if k == i else ZERO for k in range(m)])
    tab = _Tableau(rows, [signs[i] * b[i] for i in range(m)], [n + i for i in range(m)])
    cost = [ZERO] * n + [ONE] * m
    _minimize(tab, cost, range(n + m))
    value = sum((tab.rhs[i] for i, bi in enumerate(tab.basis) if bi >= n), ZERO)
    if value > 0:
        cb = [cost[bi] for bi in tab.basis]
        y = [
            signs[k] * sum((c * row[n + k] for c, row in zip(cb, tab.rows) if c), ZERO)
            for k in range(m)
        ]
        return None, y
    if clean:
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= n:
                j = next((j for j in range(n) if tab.rows[i][j] != 0), None)
                if j is None:
                    del tab.rows[i], tab.rhs[i], tab.basis[i]
                    continue
                tab.pivot(i, j)
            i += 1
        for row in tab.rows:
            del row[n:]
    return tab, None


class _StandardForm:
    """Translation of a LinearSystem to ``A y = b, y >= 0``.

    Variables with an explicit ``-x_i <= 0`` row stay single columns; free
    variables are split as ``x = p - n``; remaining inequalities get slacks.
    """

    def __init__(self, system: LinearSystem) -> None:
        d = system.dimension
        self.system = system
        nonneg_rows: dict[int, tuple[int, Fraction]] = {}
        kept: list[int] = []
        for k, (row, rhs) in enumerate(system.inequalities):
            support = [(i, a) for i, a in enumerate(row) if a]
            if rhs == 0 and len(support) == 1 and support[0][1] < 0 and support[0][0] not in nonneg_rows:
                nonneg_rows[support[0][0]] = (k, support[0][1])
            else:
                kept.append(k)
        self.nonneg_rows = nonneg_rows
        self.kept = kept
        # column spec: (variable index, sign) or (None, slack row)
        self.columns: list[tuple[int | None, int]] = []
        for i in range(d):
            self.columns.append((i, 1))
            if i not in nonneg_rows:
                self.columns.append((i, -1))
        n_var = len(self.columns)
        for k in range(len(kept)):
            self.columns.append((None, k))
        self.n = len(self.columns)
        A: list[list[Fraction]] = []
        b: list[Fraction] = []
        for row, rhs in system.equalities:
            A.append([row[i] * s for i, s in self.columns[:n_var]] + [ZERO] * len(kept))
            b.append(rhs)
        for pos, k in enumerate(kept):
            row, rhs = system.inequalities[k]
            A.append(
                [row[i] * s for i, s in self.columns[:n_var]]
                + [ONE if q == pos else ZERO for q in range(len(kept))]
            )
            b.append(rhs)
        self.A = A
        self.b = b

    def to_original(self, y: Sequence[Fraction]) -> Vector:
        x = [ZERO] * self.system.dimension
        for (i, s), val in zip(self.columns, y):
            if i is not None and val:
                x[i] += s * val
        return tuple(x)

    def certificate(self, y: Sequence[Fraction]) -> FarkasCertificate:
        system = self.system
        n_eq = len(system.equalities)
        u = tuple(-v for v in y[:n_eq])
        v_kept = [-v for v in y[n_eq:]]
        v = [ZERO] * len(system.inequalities)
        for pos, k in enumerate(self.kept):
            v[k] = v_kept[pos]
        combo = [ZERO] * system.dimension
        for mult, (row, _) in zip(u, system.equalities):
            for i, a in enumerate(row):
                combo[i] += mult * a
        for pos, k in enumerate(self.kept):
            for i, a in enumerate(system.inequalities[k][0]):
                combo[i] += v_kept[pos] * a
        for i, (k, a) in self.nonneg_rows.items():
            # the sign row a*x_i <= 0 (a < 0) absorbs the non-negative leftover
            v[k] = -combo[i] / a
        return FarkasCertificate(u, tuple(v))


def solve_feasibility(system: LinearSystem) -> Feasible | Infeasible:
    """Decide whether ``system`` has a rational solution, with a certificate either way."""
    std = _StandardForm(system)
    tab, y = _phase_one(std.A, std.b, std.n, clean=False)
    if tab is None:
        cert = std.certificate(y)
        assert cert.verify(system), "Farkas certificate failed re-substitution"
        return Infeasible(cert)
    point = std.to_original(tab.solution(std.n))
    assert system.satisfied_by(point), "feasible point failed re-substitution"
    return Feasible(point)


def hull_membership(
    point: Sequence[object], generators: Sequence[Sequence[object]]
) -> Member | NotMember:
    """Decide ``point in conv(generators)`` exactly."""
    p = to_vector(point)
    gens = [to_vector(g) for g in generators]
    d = len(p)
    for k, g in enumerate(gens):
        if len(g) != d:
            raise StructuralError(f"generator {k} has dimension {len(g)}, expected {d}")
    N = len(gens)
    A = [[g[k] for g in gens] for k in range(d)] + [[ONE] * N]
    b = list(p) + [ONE]
    tab, y = _phase_one(A, b, N, clean=False)
    if tab is None:
        result = NotMember(tuple(y[:d]), -y[d])
        assert result.verify(p, gens), "separating hyperplane failed re-substitution"
        return result
    lam = tab.solution(N)
    cert = HullCertificate(tuple((i, v) for i, v in enumerate(lam) if v))
    assert cert.verify(p, gens), "hull certificate failed re-substitution"
    return Member(cert)


def _affine_parametrization(system: LinearSystem) -> tuple[Vector, list[Vector]] | None:
    """``(x0, N)`` with ``{x : E x = e} = {x0 + N t}``, or None if inconsistent."""
    n = system.dimension
    work = [list(r) + [b] for r, b in system.equalities]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        lead = work[r][c]
        work[r] = [a / lead for a in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
    if any(row[n] for row in work[r:]):
        return None
    x0 = [ZERO] * n
    for i, c in enumerate(pivots):
        x0[c] = work[i][n]
    return tuple(x0), nullspace([row[:n] for row in work[:r]], n)


def _normalized(v: list[Fraction]) -> list[Fraction]:
    lead = next(abs(a) for a in v if a)
    return [a / lead for a in v]


def _extreme_rays(rows: list[Vector], dim: int) -> list[list[Fraction]]:
    """Extreme rays of the pointed cone ``{z : h . z >= 0}`` by double description.

    ``rows`` must have rank ``dim``; the first ``dim`` independent rows seed a
    simplicial cone and the rest are added one at a time, combining adjacent
    rays across each new hyperplane.
    """
    seed: list[int] = []
    for k, h in enumerate(rows):
        if rank([rows[i] for i in seed] + [h]) > len(seed):
            seed.append(k)
            if len(seed) == dim:
                break
    square = [list(rows[k]) for k in seed]
    inverse_cols = [nullspace([square[i] for i in range(dim) if i != j], dim)[0] for j in range(dim)]
    rays = []
    for j, v in enumerate(inverse_cols):
        scale = dot(square[j], v)
        rays.append(_normalized([a / scale for a in v]))
    processed = list(seed)
    zeros = [frozenset(k for k in processed if not dot(rows[k], r)) for r in rays]
    for k in (k for k in range(len(rows)) if k not in seed):
        h = rows[k]
        values = [dot(h, r) for r in rays]
        pos = [i for i, v in enumerate(values) if v > 0]
        neg = [i for i, v in enumerate(values) if v < 0]
        keep = [i for i, v in enumerate(values) if v >= 0]
        new_rays = [rays[i] for i in keep]
        new_zeros = [zeros[i] | {k} if values[i] == 0 else zeros[i] for i in keep]
        for i in pos:
            for j in neg:
                common = zeros[i] & zeros[j]
                if len(common) < dim - 2:
                    continue
                if any(common <= zeros[q] for q in range(len(rays)) if q != i and q != j):
                    continue
                combo = [values[i] * b - values[j] * a for a, b in zip(rays[i], rays[j])]
                new_rays.append(_normalized(combo))
                new_zeros.append(common | {k})
        rays, zeros = new_rays, new_zeros
        processed.append(k)
    return rays


@lru_cache(maxsize=256)
def _vertices(system: LinearSystem) -> tuple[Vector, ...]:
    param = _affine_parametrization(system)
    if param is None:
        return ()
    x0, N = param
    d = len(N)

    def lift(t: Sequence[Fraction]) -> Vector:
        return tuple(x0[i] + sum((N[k][i] * t[k] for k in range(d)), ZERO) for i in range(system.dimension))

    if d == 0:
        return (x0,) if system.satisfied_by(x0) else ()
    # cone over the polytope in (t, s) coordinates: s >= 0 and s*g - G(x0*s + N t) >= 0
    rows: list[Vector] = [tuple([ZERO] * d + [ONE])]
    for r, b in system.inequalities:
        rows.append(tuple([-dot(r, col) for col in N] + [b - dot(r, x0)]))
    if rank(rows) < d + 1:
        lineality = nullspace(rows, d + 1)[0]
        if isinstance(solve_feasibility(system), Infeasible):
            return ()
        raise UnboundedError("polyhedron contains a line", lift(lineality[:d]))
    rays = _extreme_rays(rows, d + 1)
    points = [lift([a / r[d] for a in r[:d]]) for r in rays if r[d] > 0]
    if not points:
        return ()
    for r in rays:
        if r[d] == 0:
            raise UnboundedError("polyhedron is unbounded", tuple(a - b for a, b in zip(lift(r[:d]), x0)))
    return tuple(sorted(set(points)))


def enumerate_vertices(system: LinearSystem) -> list[Vector]:
    """Vertices of the bounded polytope ``system``, sorted lexicographically.

    Raises :class:`UnboundedError` if the polyhedron has a recession direction.
    """
    return list(_vertices(system))
