from __future__ import annotations

import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from obkit.groups import (
    Filtration,
    FiltrationViolation,
    FiniteGroupAction,
    GroupError,
    NotGenerating,
    SubsetChain,
    birkhoff_metric,
    birkhoff_tables,
    cayley_width,
    chain_bound,
    chain_metric,
    chain_metric_bruteforce,
    cyclic,
    direct_product,
    from_permutations,
    group_corpus,
    induce_action,
    large_subset_square,
    lipschitz_orbit_bound,
    normalize_chain,
    orbit_bound_violation,
    random_filtration,
    restrict_group,
    right_multiplication,
    subgroup_transversal,
    subgroups,
    symmetric,
    trivial_action,
    word_distances,
)
from obkit.instances import random_isometric_action
from obkit.metric import RationalMetricSpace

SMALL = group_corpus(12)
CORPUS = group_corpus(24)


def random_chain(G, rng):
    elems = list(G.elements)
    rng.shuffle(elems)
    cuts = sorted(rng.sample(range(1, G.order + 1), min(G.order, 3)))
    return normalize_chain(G, [elems[:c] for c in cuts] + [elems])


# --- group basics ------------------------------------------------------------------


@pytest.mark.parametrize("G", CORPUS, ids=lambda G: G.name)
def test_corpus_groups_are_groups(G):
    e = G.identity
    for a in G.elements:
        assert G.mul(a, e) == a == G.mul(e, a)
        assert G.mul(a, G.inv(a)) == e
    rng = random.Random(G.order)
    for _ in range(50):
        a, b, c = (rng.randrange(G.order) for _ in range(3))
        assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))


def test_from_permutations_sym3():
    G, elems = from_permutations([(1, 0, 2), (1, 2, 0)])
    assert G.order == 6 and len(set(elems)) == 6
    assert not G.is_abelian()


# --- chain metric ----------------------------------------------------------------------


def test_chain_metric_c2():
    G = cyclic(2)
    chain = SubsetChain.of([{0}, {0, 1}])
    assert chain_metric(G, chain, 0, 1) == 1
    assert chain_metric(G, chain, 1, 1) == 0
    assert chain_bound(G, chain) == (1, 1)


def test_chain_rejects_bad_chains():
    G = cyclic(4)
    with pytest.raises(GroupError):
        chain_metric(G, SubsetChain.of([{0}, {0, 1, 3}]), 0, 1)  # not exhaustive
    with pytest.raises(GroupError):
        chain_metric(G, SubsetChain.of([{0}, {0, 1}, {0, 1, 2, 3}]), 0, 1)  # not symmetric
    with pytest.raises(GroupError):
        normalize_chain(G, [{1}])


def test_chain_bound_prefers_least_n():
    G = cyclic(5)
    chain = normalize_chain(G, [{1}, range(5)])
    assert chain.sets[1] == frozenset({0, 1, 4})
    assert chain_bound(G, chain) == (1, 2)


def chain_metric_words(G, chain, f, g, max_cost=12):
    """Enumerate products of chain elements by total cost; first cost reaching g wins."""
    level = {h: chain.level(h) for h in G.elements if h != G.identity}
    reach = {f: 0}
    for cost in range(1, max_cost + 1):
        new = set()
        for u, c in list(reach.items()):
            for h, k in level.items():
                if c + k == cost:
                    v = G.mul(u, h)
                    if v not in reach:
                        new.add(v)
        for v in new:
            reach[v] = cost
    return reach.get(g) if f != g else 0


@pytest.mark.parametrize("G", SMALL, ids=lambda G: G.name)
def test_chain_metric_left_invariant_exhaustive(G):
    chain = random_chain(G, random.Random(G.order * 7 + len(G.name)))
    rows = [[chain_metric(G, chain, a, b) for b in G.elements] for a in G.elements]
    for x, a, b in itertools.product(G.elements, repeat=3):
        assert rows[G.mul(x, a)][G.mul(x, b)] == rows[a][b]
    for a in G.elements:
        assert rows[a][a] == 0
        for b in G.elements:
            assert rows[a][b] == rows[b][a]


@pytest.mark.parametrize("seed", range(25))
def test_chain_metric_matches_oracles(seed):
    rng = random.Random(seed)
    G = rng.choice(SMALL)
    chain = random_chain(G, rng)
    for _ in range(5):
        a, b = rng.randrange(G.order), rng.randrange(G.order)
        d = chain_metric(G, chain, a, b)
        assert d == chain_metric_bruteforce(G, chain, a, b)
        assert d == chain_metric_words(G, chain, a, b)


@pytest.mark.parametrize("seed", range(15))
def test_chain_bound_is_minimal(seed):
    rng = random.Random(seed)
    G = rng.choice(SMALL)
    chain = random_chain(G, rng)
    n, k = chain_bound(G, chain)
    W = chain.sets[n]
    prod = {G.identity}
    for _ in range(k):
        prod = {G.mul(a, b) for a in prod for b in W}
    assert prod == set(G.elements)
    # no smaller index reaches G by any power
    for m in range(n):
        layer = set(chain.sets[m])
        for _ in range(G.order):
            layer = {G.mul(a, b) for a in layer for b in chain.sets[m]}
        assert layer != set(G.elements)


# --- Birkhoff metric -----------------------------------------------------------------


def c4_filtration():
    return Filtration.of(-1, [{0}, {0, 1, 3}, range(4)])


def test_birkhoff_c4_example():
    G = cyclic(4)
    delta, d = birkhoff_metric(G, c4_filtration(), 0, 2)
    assert delta == 2
    # two hops through s, each of weight 2^0
    assert d == 2
    assert delta <= 2 * d <= 2 * delta
    assert birkhoff_metric(G, c4_filtration(), 0, 1) == (1, 1)
    assert birkhoff_metric(G, c4_filtration(), 3, 3) == (0, 0)


def test_birkhoff_violations():
    G = cyclic(4)
    with pytest.raises(FiltrationViolation) as exc:
        birkhoff_metric(G, Filtration.of(0, [{0, 1}, range(4)]), 0, 1)
    assert exc.value.condition == "I"
    with pytest.raises(FiltrationViolation) as exc:
        birkhoff_metric(G, Filtration.of(0, [{0}, {0, 1, 3}]), 0, 1)
    assert exc.value.condition == "II"
    G8 = cyclic(8)
    with pytest.raises(FiltrationViolation) as exc:
        birkhoff_metric(G8, Filtration.of(0, [{0, 1, 7}, {0, 1, 2, 6, 7}, range(8)]), 0, 1)
    assert exc.value.condition == "III" and exc.value.index == 0


def hop_oracle(G, filt, a, b):
    """Cheapest delta path by exhaustive enumeration of simple paths (small groups)."""
    delta, _ = birkhoff_tables(G, filt)
    best = delta[a][b]
    others = [v for v in G.elements if v not in (a, b)]
    for r in range(1, min(len(others), 3) + 1):
        for mid in itertools.permutations(others, r):
            path = (a,) + mid + (b,)
            best = min(best, sum(delta[u][v] for u, v in zip(path, path[1:])))
    return best


@pytest.mark.parametrize("seed", range(30))
def test_birkhoff_sandwich_and_invariance(seed):
    rng = random.Random(seed)
    G = rng.choice(CORPUS)
    filt = random_filtration(G, rng)
    delta, d = birkhoff_tables(G, filt)
    for a in G.elements:
        for b in G.elements:
            if a != b:
                assert delta[a][b] <= 2 * d[a][b] <= 2 * delta[a][b]
                assert delta[a][b] == F(2) ** filt.level(G.mul(G.inv(a), b))
    x = rng.randrange(G.order)
    for a in G.elements:
        for b in G.elements:
            assert d[G.mul(x, a)][G.mul(x, b)] == d[a][b]
    if G.order <= 6:
        a, b = rng.randrange(G.order), rng.randrange(G.order)
        if a != b:
            assert d[a][b] == hop_oracle(G, filt, a, b)


# --- Cayley width and squares -------------------------------------------------------


def test_cayley_width_examples():
    G = cyclic(5)
    assert cayley_width(G, range(5)) == 1
    assert cayley_width(G, {0, 1, 4}) == 2
    S3 = symmetric(3)
    t = next(a for a in S3.elements if a != S3.identity and S3.inv(a) == a)
    with pytest.raises(NotGenerating):
        cayley_width(S3, {S3.identity, t})
    with pytest.raises(GroupError):
        cayley_width(G, {1, 4})
    with pytest.raises(GroupError):
        cayley_width(G, {0, 1})


def bfs_width(G, E):
    dist = {G.identity: 0}
    queue = [G.identity]
    for u in queue:
        for e in E:
            v = G.mul(u, e)
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return max(dist.values()) if len(dist) == G.order else None


@pytest.mark.parametrize("seed", range(30))
def test_cayley_width_bfs_and_monotone(seed):
    rng = random.Random(seed)
    G = rng.choice(CORPUS)
    E = {G.identity}
    for a in rng.sample(list(G.elements), min(G.order, 3)):
        E |= {a, G.inv(a)}
    expect = bfs_width(G, E)
    if expect is None:
        with pytest.raises(NotGenerating):
            cayley_width(G, E)
        return
    w = cayley_width(G, E)
    assert w == max(expect, 1)
    a = rng.randrange(G.order)
    bigger = E | {a, G.inv(a)}
    assert cayley_width(G, bigger) <= w


def test_large_subset_square_examples():
    G = cyclic(3)
    rep = large_subset_square(G, range(3))
    assert rep.majority and rep.covers
    for g, b1, b2 in rep.witnesses:
        assert G.mul(b1, b2) == g
    C4 = cyclic(4)
    rep = large_subset_square(C4, {0, 2})
    assert not rep.majority and not rep.covers and rep.missing == (1, 3)
    rep = large_subset_square(C4, {0, 1, 3})
    assert rep.majority and rep.covers


@pytest.mark.parametrize("G", CORPUS, ids=lambda G: G.name)
def test_symmetric_majority_always_squares(G):
    rng = random.Random(G.order)
    for _ in range(10):
        B = {G.identity}
        while 2 * len(B) <= G.order:
            a = rng.randrange(G.order)
            B |= {a, G.inv(a)}
        rep = large_subset_square(G, B)
        assert rep.majority and rep.covers
        assert {G.mul(a, b) for a in B for b in B} == set(G.elements)


# --- induced action ------------------------------------------------------------------


def two_point_swap():
    return RationalMetricSpace.from_rows([[0, 1], [1, 0]])


def test_induce_index_one():
    G = cyclic(3)
    X = RationalMetricSpace.from_rows([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    base = FiniteGroupAction(G, X, ((0, 1, 2), (1, 2, 0), (2, 0, 1)))
    ind = induce_action(G, range(3), (0,), base)
    assert len(ind.points) == 3
    assert ind.action.space.matrix == X.matrix
    assert ind.action.perms == base.perms


def test_induce_c4_over_center():
    G = cyclic(4)
    H = {0, 2}
    Hg, idx = restrict_group(G, H)
    base = FiniteGroupAction(Hg, two_point_swap(), ((0, 1), (1, 0)))
    ind = induce_action(G, H, (0, 1), base, idx)
    assert len(ind.points) == 4
    assert ind.action.is_isometric()
    for i in range(4):
        assert ind.action.orbit_diameter(i) <= 1
    assert orbit_bound_violation(ind) is None


def test_induce_rejects_bad_input():
    G = cyclic(4)
    Hg, idx = restrict_group(G, {0, 2})
    base = FiniteGroupAction(Hg, two_point_swap(), ((0, 1), (1, 0)))
    with pytest.raises(GroupError):
        induce_action(G, {0, 2}, (0, 2), base, idx)  # same coset twice
    with pytest.raises(GroupError):
        induce_action(G, {0, 1}, (0, 2), base, idx)  # not a subgroup
    X = RationalMetricSpace.from_rows([[0, F(1, 2), 1], [F(1, 2), 0, F(1, 2)], [1, F(1, 2), 0]])
    bad = FiniteGroupAction(Hg, X, ((0, 1, 2), (1, 0, 2)))
    with pytest.raises(GroupError):
        induce_action(G, {0, 2}, (0, 1), bad, idx)


def random_induced(seed):
    rng = random.Random(seed)
    while True:
        G = rng.choice(group_corpus(8))
        H = rng.choice([H for H in subgroups(G) if G.order // len(H) <= 3])
        Hg, idx = restrict_group(G, H)
        base = random_isometric_action(rng, Hg, 2)
        if base.space.n ** (G.order // len(H)) <= 200:
            T = subgroup_transversal(G, H)
            return G, H, induce_action(G, H, T, base, idx)


@pytest.mark.parametrize("seed", range(20))
def test_induce_random_properties(seed):
    G, H, ind = random_induced(seed)
    act = ind.action
    n = len(ind.points)
    d = act.space.matrix.entries
    # the metric over T equals the sup over all of G
    for i in range(n):
        for j in range(n):
            assert d[i][j] == ind.sup_distance_over_group(ind.points[i], ind.points[j])
    # equivariance of every stored map and of the action
    for p in ind.points:
        for g in G.elements:
            for h in H:
                lhs = ind.value(p, G.mul(g, h))
                rhs = ind.base.act(ind.base_index[G.inv(h)], ind.value(p, g))
                assert lhs == rhs
    for g1 in G.elements:
        for g2 in G.elements:
            g12 = G.mul(g1, g2)
            for i in range(n):
                assert act.act(g12, i) == act.act(g1, act.act(g2, i))
    for g in G.elements:
        gi = G.inv(g)
        for i, p in enumerate(ind.points):
            q = ind.points[act.act(g, i)]
            for f in G.elements:
                assert ind.value(q, f) == ind.value(p, G.mul(gi, f))
    assert act.is_isometric()
    assert orbit_bound_violation(ind) is None


# --- orbit bound for large-scale Lipschitz actions ----------------------------------------


def generating_set(G):
    gens = []
    for a in G.elements:
        if a not in G.closure(gens):
            gens.append(a)
    return gens


@pytest.mark.parametrize("G", group_corpus(12), ids=lambda G: G.name)
def test_lipschitz_orbit_bound_right_multiplication(G):
    gens = generating_set(G)
    dist = word_distances(G, gens)
    ob = lipschitz_orbit_bound(G, right_multiplication(G), dist, G.identity)
    assert ob.holds and ob.diameter <= 2 * ob.radius
    assert ob.bound == 2 * ob.k**2 * ob.M**ob.k


def test_lipschitz_orbit_bound_trivial_action():
    G = cyclic(6)
    X = RationalMetricSpace.from_rows([[0, 1], [1, 0]])
    act = trivial_action(G, X)
    ob = lipschitz_orbit_bound(G, act.perms, X.matrix.entries, 0)
    assert ob.M == 1 and ob.k == 1 and ob.radius == 0 and ob.bound == 2


@given(st.integers(2, 6), st.integers(2, 3))
def test_lipschitz_orbit_bound_products(n, m):
    G = direct_product(cyclic(n), cyclic(m))
    dist = word_distances(G, [1, m])
    ob = lipschitz_orbit_bound(G, right_multiplication(G), dist, 0)
    assert ob.holds
