"""Finite groups given by multiplication tables, and their actions.

Elements are the integers ``0..order-1``. Products follow the convention
``mul(a, b) = a * b`` (apply ``b`` first when elements are permutations).
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .metric import DistanceMatrix, RationalMetricSpace, validate_premetric

Perm = tuple[int, ...]


class GroupError(ValueError):
    pass


class FiniteGroup:
    """Multiplication table plus identity and inverse tables."""

    def __init__(self, table: Sequence[Sequence[int]], *, name: str = "", full_check: bool = False,
                 labels: Sequence[str] | None = None):
        n = len(table)
        if n == 0 or any(len(r) != n for r in table):
            raise GroupError("table must be square and nonempty")
        self.table = tuple(tuple(int(v) for v in r) for r in table)
        self.order = n
        self.name = name
        self.labels = tuple(labels) if labels is not None else None
        for r in self.table:
            if sorted(r) != list(range(n)):
                raise GroupError("every row must be a permutation")
        ids = [e for e in range(n) if all(self.table[e][a] == a == self.table[a][e] for a in range(n))]
        if not ids:
            raise GroupError("no identity element")
        self.identity = ids[0]
        inv = []
        for a in range(n):
            row = self.table[a]
            inv.append(row.index(self.identity))
        self.inverse = tuple(inv)
        for a in range(n):
            if self.table[inv[a]][a] != self.identity:
                raise GroupError(f"element {a} has no two-sided inverse")
        if full_check:
            triples = itertools.product(range(n), repeat=3)
        else:
            rng = random.Random(n)
            triples = [tuple(rng.randrange(n) for _ in range(3)) for _ in range(min(n**3, 400))]
        for a, b, c in triples:
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise GroupError(f"associativity fails at {(a, b, c)}")

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or self.order})"

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def product(self, *elems: int) -> int:
        acc = self.identity
        for e in elems:
            acc = self.table[acc][e]
        return acc

    def set_product(self, A: Iterable[int], B: Iterable[int]) -> frozenset[int]:
        B = list(B)
        return frozenset(self.table[a][b] for a in A for b in B)

    def set_inverse(self, A: Iterable[int]) -> frozenset[int]:
        return frozenset(self.inverse[a] for a in A)

    def is_symmetric(self, A: Iterable[int]) -> bool:
        A = frozenset(A)
        return self.set_inverse(A) == A

    def closure(self, gens: Iterable[int]) -> frozenset[int]:
        """Subgroup generated by ``gens``."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = self.table[a][g]
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        return frozenset(seen)

    def is_subgroup(self, H: Iterable[int]) -> bool:
        H = frozenset(H)
        return self.identity in H and all(self.table[a][self.inverse[b]] in H for a in H for b in H)

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a] for a in range(self.order) for b in range(a))


def from_permutations(gens: Sequence[Perm], name: str = "") -> tuple[FiniteGroup, list[Perm]]:
    """Permutation group generated by ``gens``; returns the group and its element list."""
    if not gens:
        raise GroupError("need at least one generator")
    deg = len(gens[0])
    ident = tuple(range(deg))
    elems = [ident]
    index = {ident: 0}
    i = 0
    while i < len(elems):
        p = elems[i]
        for g in gens:
            q = tuple(p[g[k]] for k in range(deg))  # p o g
            if q not in index:
                index[q] = len(elems)
                elems.append(q)
        i += 1
    table = [[index[tuple(p[q[k]] for k in range(deg))] for q in elems] for p in elems]
    return FiniteGroup(table, name=name), elems


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], name=f"C{n}")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the regular ``n``-gon (order ``2n``)."""
    rot = tuple((k + 1) % n for k in range(n))
    ref = tuple((-k) % n for k in range(n))
    G, _ = from_permutations([rot, ref], name=f"D{n}")
    return G


def symmetric(n: int) -> FiniteGroup:
    if n == 1:
        return cyclic(1)
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    G, _ = from_permutations(gens, name=f"S{n}")
    G.name = f"S{n}"
    return G


def alternating(n: int) -> FiniteGroup:
    # The 3-cycles (0 1 k) generate A_n.
    gens = []
    for k in range(2, n):
        p = list(range(n))
        p[0], p[1], p[k] = 1, k, 0
        gens.append(tuple(p))
    G, _ = from_permutations(gens or [tuple(range(n))], name=f"A{n}")
    return G


def quaternion() -> FiniteGroup:
    # Unit quaternions +-1, +-i, +-j, +-k as signed basis indices.
    basis = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
             (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
             (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
             (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
    elems = [(s, b) for s in (1, -1) for b in range(4)]
    idx = {e: i for i, e in enumerate(elems)}
    table = []
    for s1, b1 in elems:
        row = []
        for s2, b2 in elems:
            s, b = basis[(b1, b2)]
            row.append(idx[(s1 * s2 * s, b)])
        table.append(row)
    return FiniteGroup(table, name="Q8")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    n, m = G.order, H.order
    table = [
        [G.table[a // m][b // m] * m + H.table[a % m][b % m] for b in range(n * m)]
        for a in range(n * m)
    ]
    return FiniteGroup(table, name=f"{G.name}x{H.name}")


def group_corpus(max_order: int = 24) -> list[FiniteGroup]:
    """A fixed list of small groups used by tests and suites."""
    out: list[FiniteGroup] = []
    for n in range(1, max_order + 1):
        out.append(cyclic(n))
    for n in range(3, max_order // 2 + 1):
        out.append(dihedral(n))
    extra = [
        symmetric(4),
        alternating(4),
        quaternion(),
        direct_product(cyclic(2), cyclic(2)),
        direct_product(direct_product(cyclic(2), cyclic(2)), cyclic(2)),
        direct_product(cyclic(2), cyclic(4)),
        direct_product(cyclic(3), cyclic(3)),
        direct_product(cyclic(2), symmetric(3)),
        direct_product(cyclic(4), cyclic(4)),
        direct_product(quaternion(), cyclic(3)),
        direct_product(cyclic(2), alternating(4)),
    ]
    out.extend(g for g in extra if g.order <= max_order)
    return out


# --- actions ------------------------------------------------------------------


class ActionError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteGroupAction:
    """``group`` acting on the points of ``space``; ``perms[g][x]`` is ``g . x``."""

    group: FiniteGroup
    space: RationalMetricSpace
    perms: tuple[Perm, ...]

    def __post_init__(self):
        G, n = self.group, self.space.n
        if len(self.perms) != G.order:
            raise ActionError("one permutation per group element required")
        for p in self.perms:
            if sorted(p) != list(range(n)):
                raise ActionError("action entries must be permutations of the points")
        if self.perms[G.identity] != tuple(range(n)):
            raise ActionError("identity must act trivially")
        for a in G.elements:
            for b in G.elements:
                pa, pb, pab = self.perms[a], self.perms[b], self.perms[G.mul(a, b)]
                if any(pa[pb[x]] != pab[x] for x in range(n)):
                    raise ActionError(f"not an action: ({a}, {b})")

    def act(self, g: int, x: int) -> int:
        return self.perms[g][x]

    def act_tuple(self, g: int, xs: Sequence[int]) -> tuple[int, ...]:
        p = self.perms[g]
        return tuple(p[x] for x in xs)

    def isometry_violation(self) -> tuple[int, int, int] | None:
        d = self.space.matrix.entries
        n = self.space.n
        for g, p in enumerate(self.perms):
            for x in range(n):
                for y in range(x + 1, n):
                    if d[p[x]][p[y]] != d[x][y]:
                        return (g, x, y)
        return None

    def is_isometric(self) -> bool:
        return self.isometry_violation() is None

    def orbit(self, x: int) -> frozenset[int]:
        return frozenset(p[x] for p in self.perms)

    def orbit_diameter(self, x: int) -> Fraction:
        orb = sorted(self.orbit(x))
        d = self.space.matrix.entries
        return max((d[a][b] for a in orb for b in orb), default=Fraction(0))


def left_regular_action(G: FiniteGroup, space: RationalMetricSpace) -> FiniteGroupAction:
    return FiniteGroupAction(G, space, tuple(tuple(G.table[g]) for g in G.elements))


def trivial_action(G: FiniteGroup, space: RationalMetricSpace) -> FiniteGroupAction:
    ident = tuple(range(space.n))
    return FiniteGroupAction(G, space, tuple(ident for _ in G.elements))


def word_distances(G: FiniteGroup, gens: Iterable[int]) -> list[list[int]]:
    """Unscaled left-invariant word metric ``|a^-1 b|``."""
    S = set(gens) | set(G.set_inverse(gens))
    if G.closure(S) != frozenset(G.elements):
        raise GroupError("generators do not generate the group")
    dist = []
    for a in G.elements:
        row = [-1] * G.order
        row[a] = 0
        frontier = [a]
        while frontier:
            nxt = []
            for u in frontier:
                for s in S:
                    v = G.table[u][s]
                    if row[v] < 0:
                        row[v] = row[u] + 1
                        nxt.append(v)
            frontier = nxt
        dist.append(row)
    return dist


def word_metric_space(G: FiniteGroup, gens: Iterable[int]) -> RationalMetricSpace:
    """``G`` with its left-invariant word metric scaled to diameter 1."""
    dist = word_distances(G, gens)
    diam = max(max(r) for r in dist) or 1
    return RationalMetricSpace.from_rows([[Fraction(v, diam) for v in r] for r in dist], strict=True)


# --- chain metric ---------------------------------------------------------------


@dataclass(frozen=True)
class SubsetChain:
    sets: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, sets: Iterable[Iterable[int]]) -> "SubsetChain":
        return cls(tuple(frozenset(s) for s in sets))

    def level(self, g: int) -> int | None:
        for k, W in enumerate(self.sets):
            if g in W:
                return k
        return None


def check_chain(G: FiniteGroup, chain: SubsetChain) -> None:
    sets = chain.sets
    if not sets:
        raise GroupError("empty chain")
    for k in range(1, len(sets)):
        if not sets[k - 1] <= sets[k]:
            raise GroupError(f"chain not increasing at {k}")
    if sets[-1] != frozenset(G.elements):
        raise GroupError("chain not exhaustive")
    for k, W in enumerate(sets):
        if not G.is_symmetric(W):
            raise GroupError(f"W_{k} is not symmetric")
    if sets[0] != frozenset({G.identity}):
        raise GroupError("W_0 must be the identity alone")


def normalize_chain(G: FiniteGroup, sets: Iterable[Iterable[int]]) -> SubsetChain:
    """Prepend ``{1}`` and replace each set by ``W u W^-1 u {1}``."""
    out = [frozenset({G.identity})]
    for W in sets:
        W = frozenset(W)
        out.append(W | G.set_inverse(W) | {G.identity} | out[-1])
    if out[-1] != frozenset(G.elements):
        raise GroupError("chain not exhaustive")
    return SubsetChain(tuple(out))


def chain_distances(G: FiniteGroup, chain: SubsetChain, f: int) -> list[int]:
    """Distances from ``f`` to every element (Dijkstra over right multiplication)."""
    check_chain(G, chain)
    steps = [(k, h) for h in G.elements for k in [chain.level(h)] if h != G.identity]
    dist = [None] * G.order
    heap = [(0, f)]
    while heap:
        c, u = heapq.heappop(heap)
        if dist[u] is not None:
            continue
        dist[u] = c
        for k, h in steps:
            v = G.table[u][h]
            if dist[v] is None:
                heapq.heappush(heap, (c + k, v))
    return dist


def chain_metric(G: FiniteGroup, chain: SubsetChain, f: int, g: int) -> Fraction:
    """Least ``k1 + ... + km`` with ``f h1 ... hm = g`` and ``hi`` in ``W_ki``."""
    return Fraction(chain_distances(G, chain, f)[g])


def chain_metric_bruteforce(G: FiniteGroup, chain: SubsetChain, f: int, g: int) -> Fraction:
    """Independent oracle: relax ``best[x]`` over all words until stable (Bellman-Ford)."""
    check_chain(G, chain)
    INF = float("inf")
    best = [INF] * G.order
    best[f] = 0
    changed = True
    while changed:
        changed = False
        for u in G.elements:
            if best[u] == INF:
                continue
            for h in G.elements:
                k = chain.level(h)
                v = G.table[u][h]
                if best[u] + k < best[v]:
                    best[v] = best[u] + k
                    changed = True
    return Fraction(best[g])


def power_width(G: FiniteGroup, W: Iterable[int]) -> int | None:
    """Least ``k`` with ``W**k = G`` (``None`` if never)."""
    W = frozenset(W)
    if not W:
        return None
    cur = W
    k = 1
    seen = set()
    while cur != frozenset(G.elements):
        if cur in seen:
            return None
        seen.add(cur)
        cur = G.set_product(cur, W)
        k += 1
    return k


def chain_bound(G: FiniteGroup, chain: SubsetChain) -> tuple[int, int]:
    """Minimal ``(n, k)`` (least ``n`` first) with ``G = W_n**k``."""
    check_chain(G, chain)
    for n, W in enumerate(chain.sets):
        k = power_width(G, W)
        if k is not None:
            return n, k
    raise GroupError("chain not exhaustive")


# --- Birkhoff-Kakutani ----------------------------------------------------------


@dataclass(frozen=True)
class Filtration:
    """``V_start, V_start+1, ...``; below ``start`` every ``V_n`` is ``{1}``."""

    start: int
    sets: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, start: int, sets: Iterable[Iterable[int]]) -> "Filtration":
        return cls(start, tuple(frozenset(s) for s in sets))

    def level(self, g: int) -> int | None:
        for i, V in enumerate(self.sets):
            if g in V:
                return self.start + i
        return None


class FiltrationViolation(GroupError):
    def __init__(self, condition: str, index: int, witness: tuple[int, ...]):
        self.condition = condition
        self.index = index
        self.witness = witness
        super().__init__(f"condition {condition} fails at n={index}: {witness}")


def check_filtration(G: FiniteGroup, filt: Filtration) -> None:
    one = G.identity
    for i, V in enumerate(filt.sets):
        n = filt.start + i
        if one not in V:
            raise FiltrationViolation("I", n, (one,))
        for a in V:
            if G.inv(a) not in V:
                raise FiltrationViolation("I", n, (a,))
    if not filt.sets or filt.sets[-1] != frozenset(G.elements):
        raise FiltrationViolation("II", filt.start + len(filt.sets) - 1, ())
    for i in range(len(filt.sets) - 1):
        V, W = filt.sets[i], filt.sets[i + 1]
        for a in V:
            for b in V:
                ab = G.mul(a, b)
                for c in V:
                    if G.mul(ab, c) not in W:
                        raise FiltrationViolation("III", filt.start + i, (a, b, c))


def birkhoff_tables(G: FiniteGroup, filt: Filtration) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """All values of ``delta`` and ``d``; both are 0 on the diagonal."""
    check_filtration(G, filt)
    n = G.order
    delta = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        ia = G.inv(a)
        for b in range(n):
            if a != b:
                delta[a][b] = Fraction(2) ** filt.level(G.mul(ia, b))
    d = [row[:] for row in delta]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return delta, d


def birkhoff_metric(G: FiniteGroup, filt: Filtration, g1: int, g2: int) -> tuple[Fraction, Fraction]:
    """``(delta(g1, g2), d(g1, g2))`` with ``d`` the cheapest chain of ``delta`` hops."""
    delta, d = birkhoff_tables(G, filt)
    return delta[g1][g2], d[g1][g2]


def random_filtration(G: FiniteGroup, rng: random.Random) -> Filtration:
    one = G.identity
    start = rng.randint(-3, 0)
    V = {one}
    for _ in range(rng.randint(0, 2)):
        a = rng.randrange(G.order)
        V |= {a, G.inv(a)}
    sets = [frozenset(V)]
    while sets[-1] != frozenset(G.elements):
        cur = sets[-1]
        nxt = set(G.set_product(G.set_product(cur, cur), cur))
        if rng.random() < 0.5:
            a = rng.randrange(G.order)
            nxt |= {a, G.inv(a)}
        if frozenset(nxt) == cur:
            a = rng.choice([g for g in G.elements if g not in cur])
            nxt |= {a, G.inv(a)}
        sets.append(frozenset(nxt))
    return Filtration(start, tuple(sets))


# --- Cayley width and squares ---------------------------------------------------


class NotGenerating(GroupError):
    pass


def cayley_width(G: FiniteGroup, E: Iterable[int]) -> int:
    """Least ``n`` with ``E**n = G`` for symmetric ``E`` containing 1."""
    E = frozenset(E)
    if G.identity not in E:
        raise GroupError("E must contain the identity")
    if not G.is_symmetric(E):
        raise GroupError("E must be symmetric")
    layer = E
    n = 1
    while len(layer) < G.order:
        nxt = G.set_product(layer, E)
        if nxt == layer:
            raise NotGenerating(f"E generates a subgroup of order {len(layer)}")
        layer = nxt
        n += 1
    return n


@dataclass(frozen=True)
class SquareReport:
    majority: bool
    covers: bool
    witnesses: tuple[tuple[int, int, int], ...]  # (g, b1, b2) with b1 b2 = g
    missing: tuple[int, ...]


def large_subset_square(G: FiniteGroup, B: Iterable[int]) -> SquareReport:
    """Decide ``B*B = G`` with witnesses; a symmetric majority always covers."""
    B = frozenset(B)
    if G.identity not in B or not G.is_symmetric(B):
        raise GroupError("B must be symmetric and contain the identity")
    Bs = sorted(B)
    wit = []
    missing = []
    for g in G.elements:
        for b1 in Bs:
            b2 = G.mul(G.inv(b1), g)
            if b2 in B:
                wit.append((g, b1, b2))
                break
        else:
            missing.append(g)
    return SquareReport(2 * len(B) > G.order, not missing, tuple(wit), tuple(missing))


# --- induced action -------------------------------------------------------------


@dataclass(frozen=True)
class InducedActionSpace:
    """Equivariant maps ``xi: G -> X`` recorded by their values on ``T``."""

    group: FiniteGroup
    subgroup: frozenset[int]
    transversal: tuple[int, ...]
    base: FiniteGroupAction
    base_index: Mapping[int, int]
    points: tuple[tuple[int, ...], ...]
    action: FiniteGroupAction

    def value(self, xi: Sequence[int], g: int) -> int:
        """``xi(g)`` from ``xi(a h) = h^-1 . xi(a)``."""
        a, h = _coset_split(self.group, self.subgroup, self.transversal, g)
        return self.base.act(self.base_index[self.group.inv(h)], xi[self.transversal.index(a)])

    def sup_distance_over_group(self, xi, zeta) -> Fraction:
        d = self.base.space.matrix.entries
        return max(d[self.value(xi, g)][self.value(zeta, g)] for g in self.group.elements)


def _coset_split(G: FiniteGroup, H: frozenset[int], T: Sequence[int], g: int) -> tuple[int, int]:
    for a in T:
        h = G.mul(G.inv(a), g)
        if h in H:
            return a, h
    raise GroupError("transversal misses a coset")


def induce_action(
    G: FiniteGroup,
    H: Iterable[int],
    T: Sequence[int],
    base: FiniteGroupAction,
    base_index: Mapping[int, int] | None = None,
) -> InducedActionSpace:
    """Induce an isometric ``G``-action from an isometric action of ``H <= G``.

    ``base`` is an action of a group isomorphic to ``H``; ``base_index`` maps
    each element of ``H`` (as an element of ``G``) to its index in ``base.group``.
    It defaults to the identity map when ``base.group`` is ``G`` itself.
    """
    H = frozenset(H)
    T = tuple(T)
    if not G.is_subgroup(H):
        raise GroupError("H is not a subgroup")
    if base_index is None:
        base_index = {h: h for h in H}
    if set(base_index) != set(H):
        raise GroupError("base_index must cover H")
    BG = base.group
    for h1 in H:
        for h2 in H:
            if base_index[G.mul(h1, h2)] != BG.mul(base_index[h1], base_index[h2]):
                raise GroupError("base_index is not a homomorphism")
    if G.identity not in T:
        raise GroupError("transversal must contain the identity")
    cosets = [frozenset(G.mul(a, h) for h in H) for a in T]
    if sum(len(c) for c in cosets) != G.order or len(frozenset().union(*cosets)) != G.order:
        raise GroupError("T is not a left transversal of H")
    bad = base.isometry_violation()
    if bad is not None:
        raise GroupError(f"base action is not isometric at {bad}")

    X = base.space
    pts = tuple(itertools.product(range(X.n), repeat=len(T)))
    index = {p: i for i, p in enumerate(pts)}
    d = X.matrix.entries
    rows = [[max((d[a][b] for a, b in zip(p, q)), default=Fraction(0)) for q in pts] for p in pts]
    Y = RationalMetricSpace(validate_premetric(rows))

    def xi_at(p, g):
        a, h = _coset_split(G, H, T, g)
        return base.act(base_index[G.inv(h)], p[T.index(a)])

    perms = []
    for g in G.elements:
        gi = G.inv(g)
        perm = []
        for p in pts:
            # (g . xi)(a) = xi(g^-1 a)
            perm.append(index[tuple(xi_at(p, G.mul(gi, a)) for a in T)])
        perms.append(tuple(perm))
    action = FiniteGroupAction(G, Y, tuple(perms))
    return InducedActionSpace(G, H, T, base, dict(base_index), pts, action)


def orbit_bound_violation(space: InducedActionSpace) -> tuple[int, int] | None:
    """First ``(xi, h)`` with ``d(xi(1), h . xi(1)) > diam(G . xi)``, if any."""
    G = space.group
    d = space.base.space.matrix.entries
    for i, p in enumerate(space.points):
        x1 = space.value(p, G.identity)
        diam = space.action.orbit_diameter(i)
        for h in sorted(space.subgroup):
            if d[x1][space.base.act(space.base_index[h], x1)] > diam:
                return i, h
    return None


def subgroup_transversal(G: FiniteGroup, H: Iterable[int]) -> tuple[int, ...]:
    """Least representative of each left coset, identity first."""
    H = frozenset(H)
    covered: set[int] = set()
    T = []
    for g in sorted(G.elements, key=lambda g: (g != G.identity, g)):
        if g not in covered:
            T.append(g)
            covered |= {G.mul(g, h) for h in H}
    return tuple(T)


def subgroups(G: FiniteGroup, limit: int = 64) -> list[frozenset[int]]:
    """Cyclic and two-generator subgroups (enough variety for tests)."""
    found = {frozenset(G.elements)}
    for a in G.elements:
        found.add(G.closure([a]))
    for a in G.elements:
        for b in range(a):
            if len(found) >= limit:
                break
            found.add(G.closure([a, b]))
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def restrict_group(G: FiniteGroup, H: Iterable[int]) -> tuple[FiniteGroup, dict[int, int]]:
    """``H`` as a standalone group, with the embedding index map ``G -> H``."""
    Hs = sorted(H, key=lambda g: (g != G.identity, g))
    idx = {h: i for i, h in enumerate(Hs)}
    table = [[idx[G.mul(a, b)] for b in Hs] for a in Hs]
    return FiniteGroup(table, name=f"sub{len(Hs)}"), idx


def distance_matrix_of(space: RationalMetricSpace) -> DistanceMatrix:
    return space.matrix


# --- orbit bound for maps that are Lipschitz for large distances ---------------------


@dataclass(frozen=True)
class OrbitBound:
    M: int
    k: int
    radius: Fraction  # max over g of d(x0, g . x0)
    diameter: Fraction
    bound: Fraction  # 2 k^2 M^k

    @property
    def holds(self) -> bool:
        return self.radius <= self.bound


def right_multiplication(G: FiniteGroup) -> tuple[Perm, ...]:
    """``g . x = x g^-1``; a left action that is rarely isometric for the word metric."""
    return tuple(tuple(G.mul(x, G.inv(g)) for x in G.elements) for g in G.elements)


def lipschitz_constants(perm: Perm, dist: Sequence[Sequence]) -> tuple[Fraction, Fraction]:
    """``(c, K)`` with ``d(gx, gy) <= c d(x, y) + K``; ``K`` only absorbs zero-distance pairs."""
    n = len(perm)
    c, K = Fraction(1), Fraction(0)
    for x in range(n):
        for y in range(x + 1, n):
            img = Fraction(dist[perm[x]][perm[y]])
            if dist[x][y] > 0:
                c = max(c, img / dist[x][y])
            else:
                K = max(K, img)
    return c, K


def lipschitz_orbit_bound(G: FiniteGroup, perms: Sequence[Perm], dist: Sequence[Sequence], x0: int) -> OrbitBound:
    """Least integer ``M`` with ``W_M`` generating, ``k`` with ``W_M**k = G``, and the orbit data.

    ``W_M`` holds the elements whose constants and displacement of ``x0`` are
    at most ``M``; ``perms[g]`` is the permutation by which ``g`` acts.
    """
    consts = [lipschitz_constants(perms[g], dist) for g in G.elements]
    disp = [Fraction(dist[x0][perms[g][x0]]) for g in G.elements]
    M = 1
    while True:
        W = frozenset(
            g for g in G.elements if consts[g][0] <= M and consts[g][1] <= M and disp[g] <= M
        )
        layer, k = W, 1
        while len(layer) < G.order:
            nxt = G.set_product(layer, W)
            if nxt == layer:
                break
            layer, k = nxt, k + 1
        if len(layer) == G.order:
            break
        M += 1
    orbit = sorted({perms[g][x0] for g in G.elements})
    diam = max((Fraction(dist[a][b]) for a in orbit for b in orbit), default=Fraction(0))
    return OrbitBound(M, k, max(disp), diam, Fraction(2 * k * k * M**k))
