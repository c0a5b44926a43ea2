"""Seeded random instances shared by the suites and the tests."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .circular import is_circular_config, point
from .groups import FiniteGroup, FiniteGroupAction
from .metric import DistanceMatrix, RationalMetricSpace, validate_premetric
from .unitary import FinitaryOperator, FinVector
from .urysohn import PartialIsometry, tuples_isometric


def metric_closure(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Shortest-path closure; keeps symmetry, the diagonal and the range."""
    d = [list(r) for r in rows]
    n = len(d)
    for k in range(n):
        for i in range(n):
            dik = d[i][k]
            for j in range(n):
                if dik + d[k][j] < d[i][j]:
                    d[i][j] = dik + d[k][j]
    return d


def random_premetric(rng: random.Random, n: int, denom: int, *, strict: bool = False) -> DistanceMatrix:
    lo = 1 if strict else 0
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(rng.randint(lo, denom), denom)
            rows[i][j] = rows[j][i] = v
    return validate_premetric(metric_closure(rows))


def random_space(rng: random.Random, n: int, denom: int) -> RationalMetricSpace:
    return RationalMetricSpace(random_premetric(rng, n, denom, strict=True), True)


def random_partial_isometry(
    rng: random.Random, X: RationalMetricSpace, max_size: int, tries: int = 50
) -> PartialIsometry:
    """A random injective distance-preserving partial map (rejection sampling)."""
    n = X.n
    for _ in range(tries):
        k = rng.randint(1, min(max_size, n))
        dom = rng.sample(range(n), k)
        img = rng.sample(range(n), k)
        if tuples_isometric(X, dom, img):
            return PartialIsometry.from_tuples(dom, img)
    x, y = rng.randrange(n), rng.randrange(n)
    return PartialIsometry.from_tuples([x], [y])


def random_isometric_action(rng: random.Random, G: FiniteGroup, denom: int) -> FiniteGroupAction:
    """``G`` acting on a disjoint union of coset spaces, with a random invariant metric.

    Each orbit is ``G / C`` for a cyclic subgroup ``C``; distances are drawn per
    orbit of ``G`` on pairs, then closed under shortest paths (which keeps the
    invariance).
    """
    pts: list[tuple[int, frozenset]] = []  # (orbit, coset)
    for orbit in range(rng.randint(1, 2)):
        C = G.closure([rng.randrange(G.order)])
        for g in G.elements:
            key = (orbit, frozenset(G.mul(g, c) for c in C))
            if key not in pts:
                pts.append(key)
    index = {key: i for i, key in enumerate(pts)}
    n = len(pts)

    def act(g, i):
        orbit, coset = pts[i]
        return index[(orbit, frozenset(G.mul(g, x) for x in coset))]

    perms = tuple(tuple(act(g, i) for i in range(n)) for g in G.elements)
    rows = [[Fraction(0)] * n for _ in range(n)]
    done: set[tuple[int, int]] = set()
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) in done:
                continue
            v = Fraction(rng.randint(1, denom), denom)
            for p in perms:
                a, b = sorted((p[i], p[j]))
                rows[a][b] = rows[b][a] = v
                done.add((a, b))
    X = RationalMetricSpace(validate_premetric(metric_closure(rows)))
    return FiniteGroupAction(G, X, perms)


def random_rational_vector(rng: random.Random, dim: int, bound: int = 3, start: int = 1) -> FinVector:
    return FinVector({start + i: rng.randint(-bound, bound) for i in range(dim)})


def householder(v: FinVector, lo: int, hi: int) -> FinitaryOperator:
    """Reflection ``I - 2 v v^T / <v|v>`` on the window ``[lo, hi]``; rational when ``v`` is."""
    n2 = v.norm2()
    m = hi - lo + 1
    rows = [
        [(1 if i == j else 0) - 2 * v[lo + i] * v[lo + j] / n2 for j in range(m)] for i in range(m)
    ]
    return FinitaryOperator(rows, lo)


def random_orthogonal(rng: random.Random, size: int, offset: int = 1, reflections: int = 2) -> FinitaryOperator:
    """Product of a signed permutation and rational Householder reflections."""
    perm = list(range(size))
    rng.shuffle(perm)
    rows = [[rng.choice((-1, 1)) if perm[i] == j else 0 for j in range(size)] for i in range(size)]
    op = FinitaryOperator(rows, offset)
    for _ in range(reflections):
        v = random_rational_vector(rng, size, start=offset)
        if not v.is_zero():
            op = householder(v, offset, offset + size - 1) @ op
    return op


def random_circle_points(rng: random.Random, count: int, denom: int) -> list[Fraction]:
    """``count`` distinct points in cyclic order, starting at a random rotation."""
    vals = sorted(rng.sample(range(denom), count))
    shift = rng.randrange(denom)
    return [point(Fraction(v + shift, denom)) for v in vals]


def random_produkt_instance(rng: random.Random, n: int, m: int, denom: int = 48):
    """``(xbar, ybar, g_images)`` with ``xbar ybar`` and ``g_images`` both in cyclic order."""
    pts = random_circle_points(rng, n + m, denom)
    xbar, ybar = pts[:n], pts[n:]
    g = random_circle_points(rng, n, denom)
    s = rng.randrange(n)
    g = g[s:] + g[:s]
    assert is_circular_config(xbar + ybar) and is_circular_config(g)
    return xbar, ybar, g
