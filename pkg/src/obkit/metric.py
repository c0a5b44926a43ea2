"""Exact rational pre-metrics of diameter at most one.

Points are indexed ``0..n-1``. Every distance is a :class:`fractions.Fraction`;
nothing in this module touches floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Sequence

from . import lp

Rat = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def rat(value) -> Fraction:
    """Parse ``"p/q"`` strings, ints and fractions; floats are rejected."""
    if isinstance(value, float):
        raise TypeError("floating point distances are not accepted")
    return Fraction(value)


class Violation(ValueError):
    """A pre-metric axiom fails; ``indices`` locates the offending entries."""

    def __init__(self, kind: str, indices: tuple[int, ...]):
        self.kind = kind
        self.indices = indices
        super().__init__(f"{kind} violated at {indices}")


@dataclass(frozen=True)
class DistanceMatrix:
    n: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def __len__(self) -> int:
        return self.n

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]

    def diameter(self) -> Fraction:
        return max((v for r in self.entries for v in r), default=ZERO)

    def restrict(self, points: Sequence[int]) -> "DistanceMatrix":
        return DistanceMatrix(
            len(points), tuple(tuple(self.entries[i][j] for j in points) for i in points)
        )

    def is_strict(self) -> bool:
        return all(self.entries[i][j] > 0 for i in range(self.n) for j in range(self.n) if i != j)


def validate_premetric(M: Sequence[Sequence]) -> DistanceMatrix:
    """Check shape, diagonal, symmetry, range [0, 1] and every triangle.

    Raises :class:`Violation` for the first failure. Triangles are scanned as
    ``(i, j, k)`` in lexicographic order, testing ``a(i,k) <= a(i,j) + a(j,k)``
    with ``j`` the intermediate point.
    """
    n = len(M)
    if n == 0:
        raise Violation("shape", ())
    for i, row in enumerate(M):
        if len(row) != n:
            raise Violation("shape", (i,))
    a = [[rat(v) for v in row] for row in M]
    for i in range(n):
        if a[i][i] != 0:
            raise Violation("diagonal", (i,))
    for i in range(n):
        for j in range(i + 1, n):
            if a[i][j] != a[j][i]:
                raise Violation("asymmetry", (i, j))
    for i in range(n):
        for j in range(n):
            if not 0 <= a[i][j] <= 1:
                raise Violation("range", (i, j))
    for i in range(n):
        ai = a[i]
        for j in range(n):
            aij = ai[j]
            aj = a[j]
            for k in range(n):
                if ai[k] > aij + aj[k]:
                    raise Violation("triangle", (i, j, k))
    return DistanceMatrix(n, tuple(tuple(r) for r in a))


@dataclass(frozen=True)
class RationalMetricSpace:
    matrix: DistanceMatrix
    strict: bool = False
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.strict and not self.matrix.is_strict():
            raise Violation("strictness", ())
        if self.labels is not None and len(self.labels) != self.matrix.n:
            raise ValueError("one label per point required")

    @classmethod
    def from_rows(cls, rows, strict: bool = False, labels=None) -> "RationalMetricSpace":
        return cls(validate_premetric(rows), strict, tuple(labels) if labels else None)

    @property
    def n(self) -> int:
        return self.matrix.n

    def d(self, i: int, j: int) -> Fraction:
        return self.matrix.entries[i][j]

    def __len__(self) -> int:
        return self.matrix.n


def _check_same_size(A: DistanceMatrix, B: DistanceMatrix) -> None:
    if A.n != B.n:
        raise ValueError(f"dimension mismatch: {A.n} != {B.n}")


def sup_distance(A: DistanceMatrix, B: DistanceMatrix) -> Fraction:
    _check_same_size(A, B)
    return max(
        (abs(x - y) for ra, rb in zip(A.entries, B.entries) for x, y in zip(ra, rb)),
        default=ZERO,
    )


def glue_premetric(A: DistanceMatrix, B: DistanceMatrix, delta) -> DistanceMatrix:
    """Couple ``A`` (points ``0..n-1``) and ``B`` (points ``n..2n-1``).

    Cross distances are ``min(1, min_l a(i,l) + delta/2 + b(l,j))``. The
    triangle inequality for the coupling needs ``delta >= sup_distance(A, B)``.
    """
    _check_same_size(A, B)
    delta = rat(delta)
    if delta < sup_distance(A, B):
        raise ValueError("delta must be at least the sup distance of A and B")
    n = A.n
    half = delta / 2
    a, b = A.entries, B.entries
    cross = [
        [min(ONE, min(a[i][l] + half + b[l][j] for l in range(n))) for j in range(n)]
        for i in range(n)
    ]
    rows = []
    for i in range(n):
        rows.append(list(a[i]) + cross[i])
    for j in range(n):
        rows.append([cross[i][j] for i in range(n)] + list(b[j]))
    return validate_premetric(rows)


def coupling_trace(C: DistanceMatrix) -> Fraction:
    """Sum of ``c(i, i')`` for a ``2n``-point coupling."""
    n = C.n // 2
    return sum((C.entries[i][n + i] for i in range(n)), ZERO)


def _coupling_lp(A: DistanceMatrix, B: DistanceMatrix):
    # Substitution y = 1 - c(i, j') makes every right-hand side nonnegative,
    # so the all-ones coupling is the starting vertex.
    n = A.n
    a, b = A.entries, B.entries

    def var(i, j):
        return i * n + j

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []

    def add(coeffs: dict[int, int], bound: Fraction):
        row = [ZERO] * (n * n)
        for v, cf in coeffs.items():
            row[v] += cf
        rows.append(row)
        rhs.append(bound)

    for j in range(n):
        for i in range(n):
            for k in range(n):
                if i != k:
                    # c(i,j') <= a(i,k) + c(k,j')
                    add({var(i, j): -1, var(k, j): 1}, a[i][k])
                    # c(j,i') <= c(j,k') + b(k,i)
                    add({var(j, i): -1, var(j, k): 1}, b[k][i])
    for j in range(n):
        for i in range(n):
            for k in range(i + 1, n):
                # a(i,k) <= c(i,j') + c(k,j')
                add({var(i, j): 1, var(k, j): 1}, 2 - a[i][k])
                # b(i,k) <= c(j,i') + c(j,k')
                add({var(j, i): 1, var(j, k): 1}, 2 - b[i][k])
    for v in range(n * n):
        add({v: 1}, ONE)
    objective = [ONE if v // n == v % n else ZERO for v in range(n * n)]
    return objective, rows, rhs


def d1_coupling(A: DistanceMatrix, B: DistanceMatrix) -> tuple[Fraction, DistanceMatrix]:
    """Exact ``d1(A, B)`` together with one optimal coupling on ``2n`` points."""
    _check_same_size(A, B)
    n = A.n
    objective, rows, rhs = _coupling_lp(A, B)
    result = lp.maximize(objective, rows, rhs)
    cross = [[ONE - result.x[i * n + j] for j in range(n)] for i in range(n)]
    full = []
    for i in range(n):
        full.append(list(A.entries[i]) + cross[i])
    for j in range(n):
        full.append([cross[i][j] for i in range(n)] + list(B.entries[j]))
    witness = validate_premetric(full)
    value = n - result.value
    assert coupling_trace(witness) == value
    return value, witness


def d1_distance(A: DistanceMatrix, B: DistanceMatrix) -> Fraction:
    return d1_coupling(A, B)[0]


def grid_step(eps) -> Fraction:
    eps = rat(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return Fraction(1, ceil(1 / eps))


def _grid_premetrics(n: int, m: int) -> Iterable[tuple[tuple[int, ...], ...]]:
    # Backtracking over upper-triangle entries (in units of 1/m) with
    # triangle pruning against already-fixed entries.
    pairs = [(i, j) for j in range(n) for i in range(j)]
    a = [[0] * n for _ in range(n)]

    def ok(i, j):
        # Pairs are filled column by column, so (k, j) is known only for k < i.
        for k in range(i):
            aik, akj, aij = a[i][k], a[k][j], a[i][j]
            if aij > aik + akj or aik > aij + akj or akj > aik + aij:
                return False
        return True

    def rec(p):
        if p == len(pairs):
            yield tuple(tuple(r) for r in a)
            return
        i, j = pairs[p]
        for v in range(m + 1):
            a[i][j] = a[j][i] = v
            if ok(i, j):
                yield from rec(p + 1)
        a[i][j] = a[j][i] = 0

    yield from rec(0)


def epsilon_net(n: int, eps) -> list[DistanceMatrix]:
    """All pre-metrics on ``n`` points with entries on the grid of step ``1/ceil(1/eps)``.

    Every member of D_n lies within ``eps`` (sup distance) of the list; see
    :func:`round_to_grid` for the covering map.
    """
    if n < 1:
        raise ValueError("n must be positive")
    step = grid_step(eps)
    m = step.denominator
    return [
        DistanceMatrix(n, tuple(tuple(Fraction(v, m) for v in row) for row in g))
        for g in _grid_premetrics(n, m)
    ]


def round_to_grid(M: DistanceMatrix, eps) -> DistanceMatrix:
    """Ceiling-round entries to the ``eps`` grid, capped at 1.

    Rounding up preserves every triangle: ceil(x + y) <= ceil(x) + ceil(y).
    """
    m = grid_step(eps).denominator
    rows = [[min(ONE, Fraction(ceil(v * m), m)) for v in row] for row in M.entries]
    return validate_premetric(rows)


# --- geodesic extension -------------------------------------------------------


@dataclass(frozen=True)
class GeodesicPoint:
    """``Original(x)`` when ``y is None``; otherwise a point of the segment x -> y.

    ``t`` is the distance from ``x``; interior points have ``0 < t < d(x, y)``.
    Build through :func:`geodesic_point` to get the canonical form.
    """

    x: int
    y: int | None = None
    t: Fraction = ZERO

    @property
    def is_original(self) -> bool:
        return self.y is None


def original(x: int) -> GeodesicPoint:
    return GeodesicPoint(x)


def geodesic_point(X: RationalMetricSpace, x: int, y: int, t) -> GeodesicPoint:
    t = rat(t)
    dxy = X.d(x, y)
    if not 0 <= t <= dxy:
        raise ValueError(f"parameter {t} outside [0, {dxy}]")
    if x == y or t == 0:
        return GeodesicPoint(x)
    if t == dxy:
        return GeodesicPoint(y)
    return GeodesicPoint(x, y, t)


def _ends(X: RationalMetricSpace, p: GeodesicPoint):
    # (endpoint, distance to it) pairs; originals are their own endpoint.
    if p.y is None:
        return ((p.x, ZERO),)
    return ((p.x, p.t), (p.y, X.d(p.x, p.y) - p.t))


def geodesic_distance(X: RationalMetricSpace, p: GeodesicPoint, q: GeodesicPoint) -> Fraction:
    """Distance in the geodesic extension built from one segment per ordered pair.

    Points on the same segment are ``|s - t|`` apart; otherwise the shortest
    route leaves through an endpoint of each segment (four cases).
    """
    for g in (p, q):
        if g.y is not None and not 0 < g.t < X.d(g.x, g.y):
            raise ValueError("interior parameter out of range")
    if p.y is not None and (p.x, p.y) == (q.x, q.y):
        return abs(p.t - q.t)
    return min(sa + X.d(u, v) + tb for u, sa in _ends(X, p) for v, tb in _ends(X, q))


# --- Hölder and Lipschitz-for-large-distances composition ---------------------


def _root_ceiling(x: Fraction, q: int, bits: int) -> Fraction:
    # Least k/2^bits with (k/2^bits)^q >= x.
    scale = 1 << bits
    lo, hi = 0, max(1, ceil(x)) * scale
    while lo < hi:
        mid = (lo + hi) // 2
        if Fraction(mid, scale) ** q >= x:
            hi = mid
        else:
            lo = mid + 1
    return Fraction(lo, scale)


def power_upper(base, exponent, bits: int = 40) -> Fraction:
    """Exact ``base**exponent`` when rational, else a certified rational upper bound."""
    base, exponent = rat(base), rat(exponent)
    if base < 0:
        raise ValueError("base must be nonnegative")
    if base == 0:
        return ZERO if exponent > 0 else ONE
    p, q = exponent.numerator, exponent.denominator
    raised = base ** p
    if q == 1:
        return raised
    num = _exact_root(raised.numerator, q)
    den = _exact_root(raised.denominator, q)
    if num is not None and den is not None:
        return Fraction(num, den)
    return _root_ceiling(raised, q, bits)


def _exact_root(v: int, q: int) -> int | None:
    lo, hi = 0, 1
    while hi**q <= v:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**q < v:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**q == v else None


@dataclass(frozen=True)
class HolderBound:
    constant: Fraction
    exponent: Fraction
    bound: Fraction


@dataclass(frozen=True)
class LipschitzBound:
    uniform: Fraction
    length: int
    displacement_bound: Fraction
    orbit_bound: Fraction


def holder_composition_bound(constants: Sequence[tuple], d) -> HolderBound:
    """Compose Hölder maps listed outermost first: ``g1 o g2 o ... o gn``.

    Returns constant ``c1 * c2**a1 * c3**(a1 a2) ...``, exponent ``a1 ... an``
    and the bound ``constant * d**exponent``. Irrational powers are replaced
    by certified rational upper bounds.
    """
    if not constants:
        raise ValueError("at least one map is required")
    d = rat(d)
    if d < 0:
        raise ValueError("d must be nonnegative")
    constant = ONE
    acc = ONE
    for c, alpha in constants:
        c, alpha = rat(c), rat(alpha)
        if c < 1 or alpha <= 0:
            raise ValueError("Hölder constants need c >= 1 and alpha > 0")
        constant *= power_upper(c, acc)
        acc *= alpha
    return HolderBound(constant, acc, constant * power_upper(d, acc))


def lipschitz_large_bound(constants: Sequence[tuple], d) -> LipschitzBound:
    """Maps with ``d(gx, gy) <= c d(x, y) + K``; ``M`` is the max over all c and K.

    A composite of ``k`` such maps moves pairs at distance ``d`` to distance
    at most ``M**k (d + k)``, and the orbit bound ``2 k**2 M**k`` holds when
    every factor also moves the base point by at most ``M``.
    """
    if not constants:
        raise ValueError("at least one map is required")
    d = rat(d)
    M = max(max(rat(c), rat(K)) for c, K in constants)
    M = max(M, ONE)
    k = len(constants)
    return LipschitzBound(M, k, M**k * (d + k), 2 * k * k * M**k)


def lipschitz_iterate(c, K, d, k: int) -> Fraction:
    """Tight form ``c**k d + K (c**(k-1) + ... + 1)`` of the iterated inequality."""
    c, K, d = rat(c), rat(K), rat(d)
    return c**k * d + K * sum((c**i for i in range(k)), ZERO)


def stack_tuples(X: RationalMetricSpace, xs: Sequence[int], ys: Sequence[int]) -> Fraction:
    """Sup metric between two ``m``-tuples of points of ``X``."""
    if len(xs) != len(ys):
        raise ValueError("tuples differ in length")
    return max((X.d(a, b) for a, b in zip(xs, ys)), default=ZERO)


def premetric_from_points(points: Sequence[Sequence[Fraction]]) -> DistanceMatrix:
    """Sup-norm distances between rational points, capped at 1 (test helper)."""
    rows = [
        [min(ONE, max((abs(a - b) for a, b in zip(p, q)), default=ZERO)) for q in points]
        for p in points
    ]
    return validate_premetric(rows)


def all_pairs(n: int):
    return itertools.combinations(range(n), 2)
