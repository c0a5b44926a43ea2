"""Finite shadows of the rational Urysohn space of diameter 1.

All constructions live inside one finite :class:`RationalMetricSpace`;
partial isometries are finite maps between its point indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .groups import FiniteGroupAction
from .metric import (
    DistanceMatrix,
    RationalMetricSpace,
    Violation,
    epsilon_net,
    validate_premetric,
)

ONE = Fraction(1)
ZERO = Fraction(0)


class PreconditionError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    """Search ran out of points; ``best`` records the largest partial state reached."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


# --- partial isometries ------------------------------------------------------------


@dataclass(frozen=True)
class PartialIsometry:
    """Injective finite map, stored as ``(source, target)`` pairs sorted by source."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        srcs = [a for a, _ in self.pairs]
        dsts = [b for _, b in self.pairs]
        if len(set(srcs)) != len(srcs):
            raise ValueError("a point has two images")
        if len(set(dsts)) != len(dsts):
            raise ValueError("map is not injective")

    @classmethod
    def from_tuples(cls, domain: Sequence[int], image: Sequence[int]) -> "PartialIsometry":
        if len(domain) != len(image):
            raise ValueError("domain and image differ in length")
        m: dict[int, int] = {}
        for a, b in zip(domain, image):
            if m.setdefault(a, b) != b:
                raise ValueError(f"point {a} sent to both {m[a]} and {b}")
        return cls(tuple(sorted(m.items())))

    @classmethod
    def from_dict(cls, m: dict[int, int]) -> "PartialIsometry":
        return cls(tuple(sorted(m.items())))

    @classmethod
    def identity(cls, points: Iterable[int]) -> "PartialIsometry":
        return cls(tuple((p, p) for p in sorted(set(points))))

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.pairs)

    @property
    def image(self) -> tuple[int, ...]:
        return tuple(b for _, b in self.pairs)

    def __call__(self, x: int) -> int:
        for a, b in self.pairs:
            if a == x:
                return b
        raise KeyError(x)

    def apply(self, xs: Sequence[int]) -> tuple[int, ...]:
        m = self.as_dict()
        return tuple(m[x] for x in xs)

    def inverse(self) -> "PartialIsometry":
        return PartialIsometry(tuple(sorted((b, a) for a, b in self.pairs)))

    def compose(self, inner: "PartialIsometry") -> "PartialIsometry":
        """``self o inner`` on the points where it is defined."""
        m = self.as_dict()
        return PartialIsometry(tuple(sorted((a, m[b]) for a, b in inner.pairs if b in m)))

    def fixes(self, points: Iterable[int]) -> bool:
        m = self.as_dict()
        return all(m.get(p) == p for p in points)

    def is_identity(self) -> bool:
        return all(a == b for a, b in self.pairs)

    def violation(self, X: RationalMetricSpace) -> tuple[int, int] | None:
        d = X.matrix.entries
        pairs = self.pairs
        for i, (a, fa) in enumerate(pairs):
            for b, fb in pairs[i + 1:]:
                if d[a][b] != d[fa][fb]:
                    return (a, b)
        return None

    def is_isometry_of(self, X: RationalMetricSpace) -> bool:
        return self.violation(X) is None

    def is_total_on(self, X: RationalMetricSpace) -> bool:
        return self.domain == tuple(range(X.n)) and sorted(self.image) == list(range(X.n))


def require_isometry(X: RationalMetricSpace, p: PartialIsometry) -> None:
    if any(max(a, b) >= X.n for a, b in p.pairs):
        raise PreconditionError("map refers to points outside the space")
    bad = p.violation(X)
    if bad is not None:
        raise PreconditionError(f"map does not preserve d{bad}")


def tuples_isometric(X: RationalMetricSpace, xs: Sequence[int], ys: Sequence[int]) -> bool:
    d = X.matrix.entries
    return len(xs) == len(ys) and all(
        d[xs[i]][xs[j]] == d[ys[i]][ys[j]] for i in range(len(xs)) for j in range(len(xs))
    )


def uniformly_one(X: RationalMetricSpace, xs: Sequence[int], ys: Sequence[int]) -> bool:
    d = X.matrix.entries
    return all(d[x][y] == 1 for x in xs for y in ys)


def extend_space(X: RationalMetricSpace, new_rows: Sequence[Sequence[Fraction]]) -> RationalMetricSpace:
    """Append points; ``new_rows[k]`` lists distances from new point ``k`` to all earlier points."""
    rows = [list(r) for r in X.matrix.entries]
    for r in new_rows:
        k = len(rows)
        if len(r) != k:
            raise ValueError("each new row must cover all earlier points")
        for i in range(k):
            rows[i].append(r[i])
        rows.append(list(r) + [ZERO])
    return RationalMetricSpace(validate_premetric(rows), X.strict and _strict_rows(rows))


def _strict_rows(rows) -> bool:
    return all(rows[i][j] > 0 for i in range(len(rows)) for j in range(len(rows)) if i != j)


# --- Katetov extensions ---------------------------------------------------------------


@dataclass(frozen=True)
class KatetovFunction:
    values: tuple[Fraction, ...]

    def extend(self, X: RationalMetricSpace) -> RationalMetricSpace:
        return extend_space(X, [list(self.values)])


def is_katetov(X: RationalMetricSpace, values: Sequence[Fraction]) -> bool:
    d = X.matrix.entries
    n = X.n
    if len(values) != n or any(not 0 <= v <= 1 for v in values):
        return False
    return all(
        abs(values[i] - values[j]) <= d[i][j] <= values[i] + values[j]
        for i in range(n)
        for j in range(i + 1, n)
    )


def _katetov_search(X: RationalMetricSpace, grid: Sequence[Fraction], fixed: dict[int, Fraction]):
    d = X.matrix.entries
    n = X.n
    vals: list[Fraction | None] = [None] * n

    def rec(i):
        if i == n:
            yield tuple(vals)
            return
        choices = (fixed[i],) if i in fixed else grid
        for v in choices:
            if all(abs(v - vals[j]) <= d[i][j] <= v + vals[j] for j in range(i)):
                vals[i] = v
                yield from rec(i + 1)
        vals[i] = None

    yield from rec(0)


def katetov_extensions(X: RationalMetricSpace, denom: int, *, positive: bool = False) -> list[KatetovFunction]:
    """Every Katetov function on ``X`` with values in ``{0, 1/denom, ..., 1}``.

    Lexicographic order on the value tuples. ``positive`` drops functions
    with a zero value (the new point would duplicate an old one).
    """
    if denom < 1:
        raise ValueError("denom must be positive")
    lo = 1 if positive else 0
    grid = [Fraction(k, denom) for k in range(lo, denom + 1)]
    return [KatetovFunction(v) for v in _katetov_search(X, grid, {})]


# --- amalgamation -----------------------------------------------------------------------


@dataclass(frozen=True)
class Amalgam:
    space: RationalMetricSpace
    xbar: tuple[int, ...]
    zbar: tuple[int, ...]
    ybar: tuple[int, ...]
    xbar_copy: tuple[int, ...]
    zbar_copy: tuple[int, ...]


def amalgamate_over(
    X: RationalMetricSpace,
    xbar: Sequence[int],
    zbar: Sequence[int],
    ybar: Sequence[int],
) -> Amalgam:
    """Add copies of ``xbar`` and ``zbar`` glued to ``X`` over ``ybar``.

    Every original point ``w`` sits at ``min(1, min_l d(w, y_l) + d(y_l, p))``
    from the copy of ``p``; with ``xbar`` at distance 1 from ``ybar`` this puts
    the copy of ``xbar`` at distance 1 from ``xbar`` and ``zbar``, and the
    copy of ``zbar`` at distance 1 from ``xbar``.
    """
    xbar, zbar, ybar = tuple(xbar), tuple(zbar), tuple(ybar)
    n = X.n
    if any(not 0 <= p < n for p in xbar + zbar + ybar):
        raise PreconditionError("tuple index out of range")
    if len(xbar) != len(ybar):
        raise PreconditionError("xbar and ybar must have equal length")
    if not uniformly_one(X, xbar, ybar):
        raise PreconditionError("xbar and ybar are not uniformly at distance 1")
    if set(zbar) & set(ybar):
        raise PreconditionError("zbar must be disjoint from ybar")
    d = X.matrix.entries

    # Distinct points to copy, in order of first appearance.
    sources: list[int] = []
    for p in xbar + zbar:
        if p not in sources:
            sources.append(p)
    copy_of = {p: n + k for k, p in enumerate(sources)}

    def glued(w: int, p: int) -> Fraction:
        return min([ONE] + [d[w][y] + d[y][p] for y in ybar])

    new_rows = []
    for k, p in enumerate(sources):
        row = [glued(w, p) for w in range(n)]
        for y in ybar:
            row[y] = d[y][p]
        row += [d[q][p] for q in sources[:k]]
        new_rows.append(row)
    Y = extend_space(X, new_rows)
    return Amalgam(
        Y, xbar, zbar, ybar,
        tuple(copy_of[p] for p in xbar),
        tuple(copy_of[p] for p in zbar),
    )


def add_uniform_copy(X: RationalMetricSpace, xbar: Sequence[int]) -> tuple[RationalMetricSpace, tuple[int, ...]]:
    """Add an isometric copy of ``xbar`` at distance 1 from every old point."""
    xbar = tuple(xbar)
    n = X.n
    d = X.matrix.entries
    sources: list[int] = []
    for p in xbar:
        if p not in sources:
            sources.append(p)
    rows = [[ONE] * n + [d[q][p] for q in sources[:k]] for k, p in enumerate(sources)]
    Y = extend_space(X, rows)
    where = {p: n + k for k, p in enumerate(sources)}
    return Y, tuple(where[p] for p in xbar)


def find_uniform_copy(X: RationalMetricSpace, xbar: Sequence[int], avoid: Iterable[int] = ()) -> tuple[int, ...] | None:
    """Lexicographically least ``ybar`` isometric to ``xbar`` at distance 1 from it, avoiding ``avoid``."""
    xbar = tuple(xbar)
    d = X.matrix.entries
    bad = set(avoid)
    cands = [p for p in range(X.n) if p not in bad and all(d[x][p] == 1 for x in xbar)]
    ys: list[int] = []

    def rec(i):
        if i == len(xbar):
            return True
        for p in cands:
            if all(d[p][ys[j]] == d[xbar[i]][xbar[j]] for j in range(i)):
                ys.append(p)
                if rec(i + 1):
                    return True
                ys.pop()
        return False

    return tuple(ys) if rec(0) else None


# --- four-factor decomposition -----------------------------------------------------------


@dataclass(frozen=True)
class FourFactorCertificate:
    residual: PartialIsometry  # k f h g restricted to xbar
    swap: PartialIsometry  # l: exchanges xbar and ybar
    factors: tuple[str, ...]
    checks: tuple[tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.checks)


@dataclass(frozen=True)
class FourFactor:
    space: RationalMetricSpace
    xbar: tuple[int, ...]
    ybar: tuple[int, ...]
    zbar: tuple[int, ...]
    xbar_copy: tuple[int, ...]
    zbar_copy: tuple[int, ...]
    k: PartialIsometry
    f: PartialIsometry
    h: PartialIsometry
    certificate: FourFactorCertificate


class CertificateError(AssertionError):
    pass


def four_factor_decomposition(X: RationalMetricSpace, xbar: Sequence[int], g: PartialIsometry) -> FourFactor:
    """Factor ``g`` on ``xbar`` through the stabilisers of ``xbar`` and of a far copy ``ybar``.

    Builds ``z = g(xbar)``, an amalgam with ``xbar'``, ``zbar'`` over ``ybar``,
    and the maps ``h`` (fixes ``ybar``), ``f`` (fixes ``xbar``) and ``k``
    (fixes ``ybar``) so that ``k f h g`` fixes ``xbar``. The residual lies in the
    stabiliser of ``xbar``, and stab(``ybar``) = ``l`` stab(``xbar``) ``l``
    gives a word of four factors from ``l`` stab(``xbar``).
    """
    xbar = tuple(xbar)
    require_isometry(X, g)
    gm = g.as_dict()
    if any(x not in gm for x in xbar):
        raise PreconditionError("g must be defined on every point of xbar")
    zbar = tuple(gm[x] for x in xbar)
    if not tuples_isometric(X, xbar, zbar):
        raise PreconditionError("g is not distance preserving on xbar")

    ybar = find_uniform_copy(X, xbar, avoid=zbar)
    space = X
    if ybar is None:
        space, ybar = add_uniform_copy(X, xbar)
    am = amalgamate_over(space, xbar, zbar, ybar)
    Y = am.space
    xc, zc = am.xbar_copy, am.zbar_copy

    h = PartialIsometry.from_tuples(ybar + xbar + zbar, ybar + xc + zc)
    f = PartialIsometry.from_tuples(xbar + zc, xbar + xc)
    k = PartialIsometry.from_tuples(ybar + xc, ybar + xbar)
    l = PartialIsometry.from_tuples(xbar + ybar, ybar + xbar)

    g_on_x = PartialIsometry.from_tuples(xbar, zbar)
    residual = k.compose(f.compose(h.compose(g_on_x)))
    checks = (
        ("h isometric", h.is_isometry_of(Y)),
        ("f isometric", f.is_isometry_of(Y)),
        ("k isometric", k.is_isometry_of(Y)),
        ("l isometric", l.is_isometry_of(Y)),
        ("h fixes ybar", h.fixes(ybar)),
        ("f fixes xbar", f.fixes(xbar)),
        ("k fixes ybar", k.fixes(ybar)),
        ("h maps xbar to xbar'", h.apply(xbar) == xc),
        ("h maps zbar to zbar'", h.apply(zbar) == zc),
        ("f maps zbar' to xbar'", f.apply(zc) == xc),
        ("k maps xbar' to xbar", k.apply(xc) == xbar),
        ("kfhg fixes xbar", residual.domain == tuple(sorted(set(xbar))) and residual.fixes(xbar)),
        ("xbar uniformly 1 from xbar'", uniformly_one(Y, xbar, xc)),
        ("xbar uniformly 1 from zbar'", uniformly_one(Y, xbar, zc)),
        ("ybar isometric to xbar", tuples_isometric(Y, xbar, ybar)),
        ("ybar uniformly 1 from xbar", uniformly_one(Y, xbar, ybar)),
    )
    cert = FourFactorCertificate(
        residual, l, ("l.stab", "l.stab", "l.stab", "l.stab"), checks
    )
    if not cert.ok:
        failed = [name for name, v in checks if not v]
        raise CertificateError(f"four-factor certificate failed: {failed}")
    return FourFactor(Y, xbar, ybar, zbar, xc, zc, k, f, h, cert)


# --- extension of partial isometries -------------------------------------------------------


@dataclass(frozen=True)
class Extension:
    space: RationalMetricSpace
    isometry: PartialIsometry
    method: str


def _cyclic_quotient(X: RationalMetricSpace, p: PartialIsometry, copies: int):
    """``copies`` copies of ``X`` with ``p(x)`` in copy ``i`` glued to ``x`` in copy ``i+1``.

    Returns the class map, class count and capped path metric, or ``None``
    when copy 0 does not embed isometrically.
    """
    n = X.n
    N = copies
    parent = list(range(n * N))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(N):
        for x, px in p.pairs:
            a, b = find(i * n + px), find(((i + 1) % N) * n + x)
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = sorted({find(a) for a in range(n * N)})
    cls = {r: k for k, r in enumerate(roots)}
    m = len(roots)
    label = [cls[find(a)] for a in range(n * N)]
    INF = None
    dist: list[list[Fraction | None]] = [[INF] * m for _ in range(m)]
    for k in range(m):
        dist[k][k] = ZERO
    d = X.matrix.entries
    for i in range(N):
        for u in range(n):
            for v in range(n):
                a, b = label[i * n + u], label[i * n + v]
                w = d[u][v]
                if dist[a][b] is None or w < dist[a][b]:
                    dist[a][b] = w
    for k in range(m):
        dk = dist[k]
        for a in range(m):
            dak = dist[a][k]
            if dak is None:
                continue
            da = dist[a]
            for b in range(m):
                if dk[b] is not None and (da[b] is None or dak + dk[b] < da[b]):
                    da[b] = dak + dk[b]
    rows = [[ONE if v is None else min(ONE, v) for v in r] for r in dist]
    for u in range(n):
        for v in range(n):
            if rows[label[u]][label[v]] != d[u][v]:
                return None
    shift = {label[i * n + u]: label[((i + 1) % N) * n + u] for i in range(N) for u in range(n)}
    return label, rows, shift


def _hnn_extension(X: RationalMetricSpace, p: PartialIsometry, budget: int) -> Extension | None:
    n = X.n
    for N in range(1, budget + 1):
        res = _cyclic_quotient(X, p, N)
        if res is None:
            continue
        label, rows, shift = res
        m = len(rows)
        if m > budget:
            return None
        # Keep the old points at their old indices.
        order = [label[u] for u in range(n)] + [c for c in range(m) if c not in label[:n]]
        pos = {c: k for k, c in enumerate(order)}
        try:
            M = validate_premetric([[rows[a][b] for b in order] for a in order])
        except Violation:
            continue
        Y = RationalMetricSpace(M, X.strict and M.is_strict())
        if X.strict and not Y.strict:
            continue
        sigma = PartialIsometry(tuple(sorted((pos[a], pos[shift[a]]) for a in range(m))))
        if sigma.is_total_on(Y) and sigma.is_isometry_of(Y):
            return Extension(Y, sigma, f"cyclic-quotient:{N}")
    return None


def _katetov_dfs(X: RationalMetricSpace, p: PartialIsometry, denom: int, budget: int) -> Extension:
    best = {"size": 0, "state": None}
    strict = X.strict
    lo = 1 if strict else 0
    grid = [Fraction(k, denom) for k in range(lo, denom + 1)]

    def rec(Y: RationalMetricSpace, m: dict[int, int]):
        if len(m) > best["size"]:
            best["size"], best["state"] = len(m), (Y.matrix, dict(m))
        free = [v for v in range(Y.n) if v not in m]
        if not free:
            return Extension(Y, PartialIsometry.from_dict(m), "katetov-search")
        v = free[0]
        d = Y.matrix.entries
        used = set(m.values())
        for w in range(Y.n):
            if w in used:
                continue
            if all(d[v][u] == d[w][mu] for u, mu in m.items()):
                m[v] = w
                r = rec(Y, m)
                if r is not None:
                    return r
                del m[v]
        if Y.n >= budget:
            return None
        # A fresh image point: distances to the current image are forced.
        fixed = {m[u]: d[v][u] for u in m}
        for vals in _katetov_search(Y, grid, fixed):
            Z = extend_space(Y, [list(vals)])
            if strict and not Z.strict:
                continue
            m[v] = Y.n
            r = rec(Z, m)
            if r is not None:
                return r
            del m[v]
        return None

    res = rec(X, p.as_dict())
    if res is None:
        raise BudgetExhausted(f"no extension found within {budget} points", best["state"])
    return res


def extend_partial_isometry(
    X: RationalMetricSpace,
    p: PartialIsometry,
    denom: int,
    budget: int,
    *,
    methods: Sequence[str] = ("cyclic", "katetov"),
) -> Extension:
    """Enlarge ``X`` to ``Y`` carrying a bijective isometry that extends ``p``.

    Tries a cyclic HNN-style quotient first, then a depth-first search over
    Katetov one-point extensions with values in multiples of ``1/denom``
    (branches in lexicographic order). Raises :class:`BudgetExhausted` when
    every candidate needs more than ``budget`` points.
    """
    require_isometry(X, p)
    for v in (x for r in X.matrix.entries for x in r):
        if (v * denom).denominator != 1:
            raise PreconditionError("distances must be multiples of 1/denom")
    if p.is_total_on(X):
        return Extension(X, p, "already-total")
    if X.n > budget:
        raise BudgetExhausted("space already exceeds the budget")
    if "cyclic" in methods:
        ext = _hnn_extension(X, p, budget)
        if ext is not None:
            return _verified(X, p, ext)
    if "katetov" in methods:
        return _verified(X, p, _katetov_dfs(X, p, denom, budget))
    raise BudgetExhausted("no method succeeded")


def _verified(X: RationalMetricSpace, p: PartialIsometry, ext: Extension) -> Extension:
    Y, s = ext.space, ext.isometry
    assert Y.matrix.restrict(range(X.n)) == X.matrix
    assert s.is_total_on(Y) and s.is_isometry_of(Y)
    assert all(s(a) == b for a, b in p.pairs)
    return ext


# --- approximate oligomorphy ------------------------------------------------------------


def oligomorphy_witness(n: int, eps) -> list[DistanceMatrix]:
    """Distance matrices of ``n``-tuples forming an ``eps``-dense family of orbit types."""
    return epsilon_net(n, eps)


# --- width decomposition ----------------------------------------------------------------


@dataclass(frozen=True)
class WidthDecomposition:
    U: frozenset[int]
    H: frozenset[int]
    A: tuple[tuple[int, ...], ...]
    A_prime: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]
    B_prime: tuple[tuple[int, ...], ...]
    factors: dict[int, tuple[int, int, int, int]] = field(compare=False)

    @property
    def factor_count(self) -> int:
        return 4


class DensityFailure(ValueError):
    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


def _tuple_dist(d, xs, ys) -> Fraction:
    return max((d[a][b] for a, b in zip(xs, ys)), default=ZERO)


def _orbit_representatives(action: FiniteGroupAction, length: int, budget: int) -> list[tuple[int, ...]]:
    n = action.space.n
    if n**length > budget:
        raise ValueError(f"{n}**{length} tuples exceed the budget {budget}")
    seen: set[tuple[int, ...]] = set()
    reps = []
    for t in itertools.product(range(n), repeat=length):
        if t in seen:
            continue
        reps.append(t)
        for g in action.group.elements:
            seen.add(action.act_tuple(g, t))
    return reps


def width_decomposition(action: FiniteGroupAction, xbar: Sequence[int], eps, *, budget: int = 200_000) -> WidthDecomposition:
    """Write every group element as ``u1 u2^-1 h u3^-1`` with ``u_i`` in ``U``, ``h`` in ``H``.

    ``U`` is the set of elements moving each ``x_i`` by less than ``eps``.
    ``A`` is an exact set of orbit representatives of ``2n``-tuples, so the
    density requirements hold with room to spare.
    """
    G = action.group
    eps = Fraction(eps)
    bad = action.isometry_violation()
    if bad is not None:
        raise PreconditionError(f"action is not isometric at {bad}")
    xbar = tuple(xbar)
    n = len(xbar)
    d = action.space.matrix.entries
    # Identity first so that trivial cases pick trivial witnesses.
    order = [G.identity] + [g for g in G.elements if g != G.identity]
    U = frozenset(g for g in G.elements if _tuple_dist(d, xbar, action.act_tuple(g, xbar)) < eps)
    U_list = [g for g in order if g in U]
    half = eps / 2

    A = _orbit_representatives(action, 2 * n, budget)
    A_prime, B = [], []
    for a in A:
        a1, a2 = a[:n], a[n:]
        for g in order:
            if _tuple_dist(d, xbar, action.act_tuple(g, a1)) < half:
                A_prime.append(a)
                b = action.act_tuple(g, a2)
                if b not in B:
                    B.append(b)
                break

    B_prime: list[tuple[int, ...]] = []
    hb: dict[tuple[int, ...], tuple[int, int]] = {}
    for b in B:
        found = None
        # h outermost, identity first, keeps H as small as the data allows.
        for h in order:
            hx = action.act_tuple(h, xbar)
            for u in U_list:
                if _tuple_dist(d, action.act_tuple(u, b), hx) < half:
                    found = (u, h)
                    break
            if found:
                break
        if found:
            B_prime.append(b)
            hb[b] = found

    factors: dict[int, tuple[int, int, int, int]] = {}
    for f in G.elements:
        fx = action.act_tuple(f, xbar)
        wit = None
        for b in B:
            for u in U_list:
                if _tuple_dist(d, fx, action.act_tuple(u, b)) < half:
                    wit = (b, u)
                    break
            if wit:
                break
        if wit is None:
            raise DensityFailure("U.B is not eps/2-dense", (f, fx))
        b, u1 = wit
        if b not in hb:
            raise DensityFailure("density witness outside B'", (f, b))
        u2, h = hb[b]
        u3 = G.product(G.inv(f), u1, G.inv(u2), h)
        if u3 not in U:
            raise DensityFailure("residual factor outside U", (f, u3))
        if G.product(u1, G.inv(u2), h, G.inv(u3)) != f:
            raise CertificateError(f"factorisation of {f} does not multiply out")
        factors[f] = (u1, u2, h, u3)
    H = frozenset(h for _, h in hb.values())
    return WidthDecomposition(U, H, tuple(A), tuple(A_prime), tuple(B), tuple(B_prime), factors)
