"""Automorphisms of simplicial trees.

Three backends share one interface:

* :class:`FinitePerm` permutes the vertices of a finite :class:`SimplicialTree`;
* :class:`FreeWord` acts by left translation on the Cayley tree of a free
  group (vertices are reduced words);
* :class:`LineMap` is ``x -> sign*x + shift`` on the line with vertex set Z.

Finite trees only carry elliptic maps and inversions, so hyperbolic
behaviour is exercised on the two infinite backends.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union


class TreeError(ValueError):
    pass


class Inapplicable(ValueError):
    """Hypotheses of an identity do not hold for the given pair."""


# --- finite trees ---------------------------------------------------------------


class SimplicialTree:
    def __init__(self, vertices: int, edges: Iterable[Sequence[int]]):
        self.V = int(vertices)
        es = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v or not (0 <= u < self.V and 0 <= v < self.V):
                raise TreeError(f"bad edge {e}")
            es.append((min(u, v), max(u, v)))
        if len(set(es)) != len(es):
            raise TreeError("repeated edge")
        if self.V < 1 or len(es) != self.V - 1:
            raise TreeError("a tree on V vertices has V-1 edges")
        self.edges = tuple(sorted(es))
        self.adj: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted([b for a, b in es if a == v] + [a for a, b in es if b == v])) for v in range(self.V)
        )
        if len(self.bfs(0)) != self.V:
            raise TreeError("graph is not connected")
        self.edge_set = frozenset(self.edges)

    def __repr__(self) -> str:
        return f"SimplicialTree({self.V}, {list(self.edges)})"

    def bfs(self, s: int) -> dict[int, int]:
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in self.adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    @cached_property
    def distances(self) -> tuple[tuple[int, ...], ...]:
        rows = []
        for s in range(self.V):
            d = self.bfs(s)
            rows.append(tuple(d[t] for t in range(self.V)))
        return tuple(rows)

    def dist(self, u: int, v: int) -> int:
        return self.distances[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_set

    def path(self, u: int, v: int) -> list[int]:
        D = self.distances
        out = [u]
        while out[-1] != v:
            w = out[-1]
            out.append(next(x for x in self.adj[w] if D[x][v] == D[w][v] - 1))
        return out

    def is_subtree(self, S: Iterable[int]) -> bool:
        S = set(S)
        if not S:
            return False
        s = min(S)
        seen = {s}
        q = [s]
        while q:
            u = q.pop()
            for w in self.adj[u]:
                if w in S and w not in seen:
                    seen.add(w)
                    q.append(w)
        return seen == S

    def set_distance(self, A: Iterable[int], B: Iterable[int]) -> int:
        B = list(B)
        return min(self.distances[a][b] for a in A for b in B)

    def center(self) -> tuple[int, ...]:
        ecc = [max(r) for r in self.distances]
        m = min(ecc)
        return tuple(v for v in range(self.V) if ecc[v] == m)

    @classmethod
    def path_graph(cls, n: int) -> "SimplicialTree":
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def star(cls, leaves: int) -> "SimplicialTree":
        return cls(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


# --- automorphism backends ------------------------------------------------------------


@dataclass(frozen=True)
class FinitePerm:
    tree: SimplicialTree
    perm: tuple[int, ...]

    def __post_init__(self):
        T, p = self.tree, self.perm
        if sorted(p) != list(range(T.V)):
            raise TreeError("perm must be a permutation of the vertices")
        for u, v in T.edges:
            if not T.has_edge(p[u], p[v]):
                raise TreeError(f"edge {(u, v)} not preserved")

    def __call__(self, v: int) -> int:
        return self.perm[v]

    def __mul__(self, other: "FinitePerm") -> "FinitePerm":
        return FinitePerm(self.tree, tuple(self.perm[other.perm[v]] for v in range(self.tree.V)))

    def inverse(self) -> "FinitePerm":
        inv = [0] * self.tree.V
        for v, w in enumerate(self.perm):
            inv[w] = v
        return FinitePerm(self.tree, tuple(inv))

    @classmethod
    def identity(cls, tree: SimplicialTree) -> "FinitePerm":
        return cls(tree, tuple(range(tree.V)))


def _letters(r: int) -> list[int]:
    return [s * k for k in range(1, r + 1) for s in (1, -1)]


def reduce_word(w: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduction(w: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split a reduced word as ``u c u^-1`` with ``c`` cyclically reduced."""
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[:i]), tuple(w[i:j + 1])


def word_inverse(w: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(w))


def parse_word(text: str) -> tuple[int, ...]:
    """``"ab A b"``: lowercase letters are generators, uppercase their inverses."""
    out = []
    for ch in text:
        if ch.isspace():
            continue
        if not ch.isalpha():
            raise TreeError(f"bad letter {ch!r}")
        k = ord(ch.lower()) - ord("a") + 1
        out.append(k if ch.islower() else -k)
    return reduce_word(out)


def format_word(w: Sequence[int]) -> str:
    return "".join(chr(ord("a") + abs(x) - 1) if x > 0 else chr(ord("A") + abs(x) - 1) for x in w)


@dataclass(frozen=True)
class FreeWord:
    word: tuple[int, ...]
    rank: int = 2

    def __post_init__(self):
        if reduce_word(self.word) != tuple(self.word):
            raise TreeError("word is not freely reduced")
        if any(x == 0 or abs(x) > self.rank for x in self.word):
            raise TreeError("letter outside the generating set")

    @classmethod
    def parse(cls, text: str, rank: int = 2) -> "FreeWord":
        return cls(parse_word(text), rank)

    def __call__(self, v: Sequence[int]) -> tuple[int, ...]:
        return reduce_word(self.word + tuple(v))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(reduce_word(self.word + other.word), max(self.rank, other.rank))

    def inverse(self) -> "FreeWord":
        return FreeWord(word_inverse(self.word), self.rank)

    def __str__(self) -> str:
        return format_word(self.word)


def word_distance(v: Sequence[int], w: Sequence[int]) -> int:
    return len(reduce_word(word_inverse(v) + tuple(w)))


def ball(rank: int, radius: int) -> list[tuple[int, ...]]:
    out = [()]
    frontier = [()]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for x in _letters(rank):
                if not w or w[-1] != -x:
                    nxt.append(w + (x,))
        out += nxt
        frontier = nxt
    return out


@dataclass(frozen=True)
class LineMap:
    """``x -> sign * x + shift`` on the integers."""

    sign: int
    shift: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise TreeError("sign must be +1 or -1")

    def __call__(self, x: int) -> int:
        return self.sign * x + self.shift

    def __mul__(self, other: "LineMap") -> "LineMap":
        return LineMap(self.sign * other.sign, self.sign * other.shift + self.shift)

    def inverse(self) -> "LineMap":
        return LineMap(self.sign, -self.sign * self.shift)


Automorphism = Union[FinitePerm, FreeWord, LineMap]


# --- characteristic subtrees -----------------------------------------------------------


@dataclass(frozen=True)
class FixedSet:
    """Fixed vertices; ``vertices is None`` means the whole (infinite) tree."""

    vertices: frozenset | None


@dataclass(frozen=True)
class Axis:
    """Translation axis: on a free group, the points ``u c^k p`` (``p`` a prefix of ``c``)."""

    conjugator: tuple[int, ...]
    period: tuple[int, ...]
    length: int


@dataclass(frozen=True)
class InvertedEdge:
    edge: tuple


CharSubtree = Union[FixedSet, Axis, InvertedEdge]


@dataclass(frozen=True)
class Classification:
    kind: str  # "elliptic" | "hyperbolic" | "inversion"
    norm: int
    subtree: CharSubtree

    @property
    def elliptic(self) -> bool:
        return self.kind == "elliptic"

    @property
    def hyperbolic(self) -> bool:
        return self.kind == "hyperbolic"


def classify(g: Automorphism) -> Classification:
    """Translation length and characteristic subtree of ``g``."""
    if isinstance(g, FinitePerm):
        T = g.tree
        disp = [T.dist(v, g(v)) for v in range(T.V)]
        norm = min(disp)
        if norm == 0:
            fixed = frozenset(v for v in range(T.V) if disp[v] == 0)
            if not T.is_subtree(fixed):
                raise TreeError("fixed set is not connected")
            return Classification("elliptic", 0, FixedSet(fixed))
        for u, v in T.edges:
            if g(u) == v and g(v) == u:
                return Classification("inversion", 1, InvertedEdge((u, v)))
        # A finite tree automorphism always fixes its centre vertex or edge.
        raise TreeError("automorphism of a finite tree with no fixed point or inverted edge")
    if isinstance(g, FreeWord):
        u, c = cyclic_reduction(g.word)
        if not c:
            return Classification("elliptic", 0, FixedSet(None))
        return Classification("hyperbolic", len(c), Axis(u, c, len(c)))
    if isinstance(g, LineMap):
        if g.sign == 1:
            if g.shift == 0:
                return Classification("elliptic", 0, FixedSet(None))
            return Classification("hyperbolic", abs(g.shift), Axis((), (), abs(g.shift)))
        if g.shift % 2 == 0:
            return Classification("elliptic", 0, FixedSet(frozenset({g.shift // 2})))
        lo = (g.shift - 1) // 2
        return Classification("inversion", 1, InvertedEdge((lo, lo + 1)))
    raise TypeError(f"unsupported automorphism {g!r}")


def translation_length(g: Automorphism) -> int:
    return classify(g).norm


def min_displacement(g: Automorphism, radius: int | None = None) -> int:
    """Brute-force ``min_v dist(v, g v)``; infinite backends scan a ball around the base point."""
    if isinstance(g, FinitePerm):
        return min(g.tree.dist(v, g(v)) for v in range(g.tree.V))
    if isinstance(g, FreeWord):
        r = len(g.word) if radius is None else radius
        return min(word_distance(v, g(v)) for v in ball(g.rank, r))
    if isinstance(g, LineMap):
        r = abs(g.shift) + 1 if radius is None else radius
        return min(abs(g(x) - x) for x in range(-r, r + 1))
    raise TypeError(f"unsupported automorphism {g!r}")


def _axis_points(ax: Axis, radius: int) -> list[tuple[int, ...]]:
    # Walk ``radius`` steps each way along the axis from its base point u.
    c = ax.period
    L = len(c)
    fwd = [reduce_word(ax.conjugator + tuple(c[i % L] for i in range(s))) for s in range(radius + 1)]
    cinv = word_inverse(c)
    back = [reduce_word(ax.conjugator + tuple(cinv[i % L] for i in range(s))) for s in range(1, radius + 1)]
    return fwd + back


def subtree_distance(g: Automorphism, h: Automorphism) -> int:
    """``dist(T_g, T_h)``; 0 when the characteristic subtrees meet."""
    cg, ch = classify(g), classify(h)
    if "inversion" in (cg.kind, ch.kind):
        raise Inapplicable("inversions have no characteristic subtree of vertices")
    if isinstance(g, FinitePerm):
        if not isinstance(h, FinitePerm) or h.tree is not g.tree:
            raise TreeError("automorphisms of different trees")
        return g.tree.set_distance(cg.subtree.vertices, ch.subtree.vertices)
    if isinstance(g, LineMap):
        if not isinstance(h, LineMap):
            raise TreeError("mixed backends")
        A, B = cg.subtree, ch.subtree
        if isinstance(A, Axis) or isinstance(B, Axis):
            return 0
        if A.vertices is None or B.vertices is None:
            return 0
        return min(abs(a - b) for a in A.vertices for b in B.vertices)
    if isinstance(g, FreeWord):
        if not isinstance(h, FreeWord):
            raise TreeError("mixed backends")
        A, B = cg.subtree, ch.subtree
        if isinstance(A, FixedSet) or isinstance(B, FixedSet):
            return 0
        # Projection is 1-Lipschitz, so both bridge endpoints lie within
        # |g| + |h| of the base point, hence within 2(|g| + |h|) of u along the axis.
        radius = 2 * (len(g.word) + len(h.word))
        pa, pb = _axis_points(A, radius), _axis_points(B, radius)
        return min(word_distance(a, b) for a in pa for b in pb)
    raise TypeError(f"unsupported automorphism {g!r}")


def subtrees_meet(g: Automorphism, h: Automorphism) -> bool:
    return subtree_distance(g, h) == 0


# --- midpoint subdivision ----------------------------------------------------------------


def subdivide_midpoints(T: SimplicialTree, g: FinitePerm) -> tuple[SimplicialTree, FinitePerm]:
    """Insert vertex ``V + i`` in the middle of edge ``i``; the extension of ``g`` has no inversions."""
    V = T.V
    edges = []
    idx = {e: i for i, e in enumerate(T.edges)}
    for i, (u, v) in enumerate(T.edges):
        edges += [(u, V + i), (V + i, v)]
    T2 = SimplicialTree(V + len(T.edges), edges)
    perm = list(g.perm)
    for (u, v) in T.edges:
        a, b = g(u), g(v)
        perm.append(V + idx[(min(a, b), max(a, b))])
    return T2, FinitePerm(T2, tuple(perm))


# --- identities -------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    holds: bool
    lhs: int
    rhs: int
    detail: str = ""


def cm_disjoint_identity(g: Automorphism, h: Automorphism) -> IdentityCheck:
    """``||gh|| = ||g|| + ||h|| + 2 dist(T_g, T_h)`` for disjoint characteristic subtrees."""
    cg, ch = classify(g), classify(h)
    if "inversion" in (cg.kind, ch.kind):
        raise Inapplicable("inversions excluded")
    dist = subtree_distance(g, h)
    if dist == 0:
        raise Inapplicable("characteristic subtrees intersect")
    lhs = translation_length(g * h)
    rhs = cg.norm + ch.norm + 2 * dist
    return IdentityCheck("cm-disjoint", lhs == rhs, lhs, rhs, f"dist={dist}")


def cm_max_identity(g: Automorphism, h: Automorphism) -> IdentityCheck:
    """``max(||gh||, ||gh^-1||) = ||g|| + ||h||`` for hyperbolic maps with meeting axes."""
    cg, ch = classify(g), classify(h)
    if not (cg.hyperbolic and ch.hyperbolic):
        raise Inapplicable("both maps must be hyperbolic")
    if not subtrees_meet(g, h):
        raise Inapplicable("axes are disjoint")
    a, b = translation_length(g * h), translation_length(g * h.inverse())
    lhs = max(a, b)
    rhs = cg.norm + ch.norm
    return IdentityCheck("cm-max", lhs == rhs, lhs, rhs, f"||gh||={a} ||gh^-1||={b}")


def serre_check(g: Automorphism, h: Automorphism) -> IdentityCheck:
    """If ``g``, ``h`` and ``gh`` are elliptic then ``T_g`` and ``T_h`` meet."""
    if not (classify(g).elliptic and classify(h).elliptic and classify(g * h).elliptic):
        raise Inapplicable("g, h and gh must all be elliptic")
    d = subtree_distance(g, h)
    return IdentityCheck("serre", d == 0, d, 0)


@dataclass(frozen=True)
class HellyResult:
    vertex: int | None
    disjoint_pair: tuple[int, int] | None


def helly_intersection(T: SimplicialTree, subtrees: Sequence[Iterable[int]]) -> HellyResult:
    """A common vertex of pairwise-meeting subtrees, or a disjoint pair."""
    sets = [frozenset(s) for s in subtrees]
    if not sets:
        raise TreeError("need at least one subtree")
    for k, S in enumerate(sets):
        if not T.is_subtree(S):
            raise TreeError(f"set {k} is not a subtree")
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if not sets[i] & sets[j]:
                return HellyResult(None, (i, j))
    common = frozenset.intersection(*sets)
    if not common:
        raise AssertionError("pairwise-meeting subtrees with empty intersection")
    return HellyResult(min(common), None)


class PreconditionError(ValueError):
    pass


def macpherson_fixed_point(T: SimplicialTree, k0: FinitePerm, k1: FinitePerm, k2: FinitePerm) -> int:
    """A vertex fixed by ``k0 k1 k0 k2``, from three pairwise-meeting fixed sets."""
    named = {
        "k0": k0, "k1": k1, "k2": k2, "k0k1": k0 * k1, "k0k2": k0 * k2,
        "k1k0k2": k1 * k0 * k2,
    }
    for name, g in named.items():
        if not classify(g).elliptic:
            raise PreconditionError(f"{name} is not elliptic")
    # Serre on (k0, k1), (k1, k0k2) and (k0^-1, k0k2).
    pairs = [(k0, k1), (k1, named["k0k2"]), (k0.inverse(), named["k0k2"])]
    for g, h in pairs:
        if not serre_check(g, h).holds:
            raise AssertionError("Serre's lemma failed")
    fixed = [classify(g).subtree.vertices for g in (k0, k1, named["k0k2"])]
    res = helly_intersection(T, fixed)
    if res.vertex is None:
        raise AssertionError("Helly step found disjoint fixed sets")
    x = res.vertex
    f = k0 * k1 * k0 * k2
    if f(x) != x:
        raise AssertionError("returned vertex is not fixed")
    return x


# --- random generation ----------------------------------------------------------------


def random_tree(rng: random.Random, vertices: int) -> SimplicialTree:
    """Uniform labelled tree via a Pruefer sequence."""
    n = vertices
    if n == 1:
        return SimplicialTree(1, [])
    if n == 2:
        return SimplicialTree(2, [(0, 1)])
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return SimplicialTree(n, edges)


def random_symmetric_tree(rng: random.Random, max_vertices: int = 64) -> SimplicialTree:
    """Trees built from repeated copies of random branches, so automorphisms abound."""

    def template(budget: int, depth: int):
        kids = []
        size = 1
        while depth > 0 and size < budget and rng.random() < 0.7:
            child = template(max(1, (budget - size) // 3), depth - 1)
            csize = _template_size(child)
            copies = rng.randint(1, 3)
            for _ in range(copies):
                if size + csize > budget:
                    break
                kids.append(child)
                size += csize
        return kids

    root = template(max_vertices, rng.randint(1, 4))
    if rng.random() < 0.3 and 2 * _template_size(root) <= max_vertices:
        # Two copies joined by an edge: a bicentral tree with a possible inversion.
        edges: list[tuple[int, int]] = []
        a = _emit(root, edges, 0)
        b = _emit(root, edges, a)
        edges.append((0, a))
        return SimplicialTree(b, edges)
    edges = []
    n = _emit(root, edges, 0)
    return SimplicialTree(n, edges)


def _template_size(t) -> int:
    return 1 + sum(_template_size(c) for c in t)


def _emit(t, edges, start: int) -> int:
    nxt = start + 1
    for c in t:
        child = nxt
        nxt = _emit(c, edges, child)
        edges.append((start, child))
    return nxt


def _canon(T: SimplicialTree, v: int, parent: int | None, memo: dict) -> str:
    key = (v, parent)
    if key not in memo:
        kids = sorted(_canon(T, w, v, memo) for w in T.adj[v] if w != parent)
        memo[key] = "(" + "".join(kids) + ")"
    return memo[key]


def random_automorphism(T: SimplicialTree, rng: random.Random) -> FinitePerm:
    """Random automorphism by matching isomorphic branches around the centre."""
    memo: dict = {}
    perm = [-1] * T.V

    def match(u, pu, v, pv):
        perm[u] = v
        cu = [w for w in T.adj[u] if w != pu]
        cv = [w for w in T.adj[v] if w != pv]
        groups: dict[str, list[int]] = {}
        for w in cu:
            groups.setdefault(_canon(T, w, u, memo), []).append(w)
        targets: dict[str, list[int]] = {}
        for w in cv:
            targets.setdefault(_canon(T, w, v, memo), []).append(w)
        for key, ws in groups.items():
            ts = targets[key][:]
            rng.shuffle(ts)
            for w, t in zip(ws, ts):
                match(w, u, t, v)

    centre = T.center()
    if len(centre) == 1:
        c = centre[0]
        match(c, None, c, None)
    else:
        a, b = centre
        swap = _canon(T, a, b, memo) == _canon(T, b, a, memo) and rng.random() < 0.5
        if swap:
            match(a, b, b, a)
            match(b, a, a, b)
        else:
            match(a, b, a, b)
            match(b, a, b, a)
    return FinitePerm(T, tuple(perm))


def random_word(rng: random.Random, max_len: int, rank: int = 2) -> FreeWord:
    n = rng.randint(0, max_len)
    w: list[int] = []
    letters = _letters(rank)
    while len(w) < n:
        x = rng.choice(letters)
        if not w or w[-1] != -x:
            w.append(x)
    return FreeWord(tuple(w), rank)


def random_line_map(rng: random.Random, spread: int = 6) -> LineMap:
    return LineMap(rng.choice((1, -1)), rng.randint(-spread, spread))
