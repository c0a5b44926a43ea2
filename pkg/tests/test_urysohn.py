from __future__ import annotations

import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from obkit.groups import FiniteGroupAction, from_permutations, group_corpus
from obkit.instances import random_isometric_action, random_partial_isometry, random_space
from obkit.metric import RationalMetricSpace, validate_premetric
from obkit.urysohn import (
    BudgetExhausted,
    PartialIsometry,
    PreconditionError,
    add_uniform_copy,
    amalgamate_over,
    extend_partial_isometry,
    extend_space,
    four_factor_decomposition,
    is_katetov,
    katetov_extensions,
    oligomorphy_witness,
    tuples_isometric,
    uniformly_one,
    width_decomposition,
)

from conftest import premetric_rows


def space(rows, strict=True):
    return RationalMetricSpace.from_rows(rows, strict=strict)


def katetov_bruteforce(X, denom):
    grid = [F(k, denom) for k in range(denom + 1)]
    out = []
    for vals in itertools.product(grid, repeat=X.n):
        ok = all(
            abs(vals[i] - vals[j]) <= X.d(i, j) <= vals[i] + vals[j]
            for i in range(X.n)
            for j in range(X.n)
        )
        if ok:
            out.append(vals)
    return out


# --- Katetov ---------------------------------------------------------------------------


def test_katetov_examples():
    one = space([[0]])
    assert [k.values for k in katetov_extensions(one, 2)] == [(0,), (F(1, 2),), (1,)]
    pair = space([[0, 1], [1, 0]])
    assert sorted(k.values for k in katetov_extensions(pair, 1)) == [(0, 1), (1, 0), (1, 1)]


@given(premetric_rows(1, 4, 4, strict=True), st.integers(1, 4))
def test_katetov_matches_bruteforce(rows, denom):
    X = space(rows)
    got = [k.values for k in katetov_extensions(X, denom)]
    assert got == katetov_bruteforce(X, denom)
    assert (F(1),) * X.n in got
    for vals in got:
        assert is_katetov(X, vals)
        validate_premetric(extend_space(X, [list(vals)]).matrix.rows())


# --- amalgamation ----------------------------------------------------------------------


def test_amalgam_empty_z():
    X = space([[0, 1], [1, 0]])
    am = amalgamate_over(X, (0,), (), (1,))
    Z = am.space
    assert Z.n == 3 and am.zbar_copy == ()
    assert Z.d(0, am.xbar_copy[0]) == 1


def test_amalgam_single_term():
    # x=0, y=1, z=2; d(x,z)=1/2, d(z,y)=1
    X = space([[0, 1, F(1, 2)], [1, 0, 1], [F(1, 2), 1, 0]])
    am = amalgamate_over(X, (0,), (2,), (1,))
    zc = am.zbar_copy[0]
    assert am.space.d(2, zc) == 1


def test_amalgam_preconditions():
    X = space([[0, F(1, 2)], [F(1, 2), 0]])
    with pytest.raises(PreconditionError):
        amalgamate_over(X, (0,), (), (1,))
    Y = space([[0, 1], [1, 0]])
    with pytest.raises(PreconditionError):
        amalgamate_over(Y, (0,), (1,), (1,))


@given(premetric_rows(1, 5, 4, strict=True), st.data())
def test_amalgam_relations(rows, data):
    X = space(rows)
    xbar = tuple(data.draw(st.lists(st.integers(0, X.n - 1), min_size=1, max_size=2, unique=True)))
    perms = [t for t in itertools.permutations(range(X.n), len(xbar)) if tuples_isometric(X, xbar, t)]
    zbar = data.draw(st.sampled_from(perms))
    Y, ybar = add_uniform_copy(X, xbar)
    am = amalgamate_over(Y, xbar, zbar, ybar)
    Z = am.space
    validate_premetric(Z.matrix.rows())
    assert Z.matrix.restrict(range(Y.n)) == Y.matrix
    assert tuples_isometric(Z, xbar + zbar + ybar, am.xbar_copy + am.zbar_copy + ybar)
    assert uniformly_one(Z, xbar, am.xbar_copy)
    assert uniformly_one(Z, xbar, am.zbar_copy)
    assert uniformly_one(Z, zbar, am.xbar_copy)
    for zi in zbar:
        for zj, zc in zip(zbar, am.zbar_copy):
            expect = min([F(1)] + [Z.d(zi, y) + Z.d(y, zj) for y in ybar])
            assert Z.d(zi, zc) == expect


# --- four-factor decomposition -----------------------------------------------------------


def test_four_factor_identity():
    X = space([[0, F(1, 2)], [F(1, 2), 0]])
    ff = four_factor_decomposition(X, (0,), PartialIsometry.identity([0]))
    assert ff.certificate.ok and ff.certificate.residual.is_identity()
    assert ff.zbar == ff.xbar
    assert len(ff.certificate.factors) == 4


def test_four_factor_small_example():
    X = space([[0, F(1, 2), F(1, 2)], [F(1, 2), 0, F(1, 2)], [F(1, 2), F(1, 2), 0]])
    g = PartialIsometry.from_tuples((0,), (1,))
    ff = four_factor_decomposition(X, (0,), g)
    assert ff.space.n <= 9
    Y = ff.space
    for p in (ff.h, ff.f, ff.k):
        assert p.is_isometry_of(Y)
    assert ff.h.fixes(ff.ybar) and ff.k.fixes(ff.ybar) and ff.f.fixes(ff.xbar)
    # k f h g fixes xbar, checked by direct composition
    for x in ff.xbar:
        assert ff.k(ff.f(ff.h(g(x)))) == x


def test_four_factor_rejects_non_isometry():
    X = space([[0, F(1, 2), 1], [F(1, 2), 0, 1], [1, 1, 0]])
    with pytest.raises(Exception):
        four_factor_decomposition(X, (0, 1), PartialIsometry.from_tuples((0, 1), (0, 2)))


# --- extension search ----------------------------------------------------------------


def test_extend_examples():
    X = space([[0, F(1, 2)], [F(1, 2), 0]])
    total = PartialIsometry.from_tuples((0, 1), (1, 0))
    ext = extend_partial_isometry(X, total, 2, 6)
    assert ext.space == X and ext.isometry == total
    ext = extend_partial_isometry(X, PartialIsometry.from_tuples((0,), (1,)), 2, 6)
    assert ext.space.n <= 6 and ext.isometry.is_isometry_of(ext.space)
    tri = space([[0, F(1, 2), F(1, 2)], [F(1, 2), 0, F(1, 2)], [F(1, 2), F(1, 2), 0]])
    ext = extend_partial_isometry(tri, PartialIsometry.from_tuples((0,), (1,)), 2, 6)
    assert ext.space.n <= 6 and ext.isometry(0) == 1


def test_extend_budget_exhaustion():
    X = space([[0, F(1, 2), 1], [F(1, 2), 0, F(1, 2)], [1, F(1, 2), 0]])
    p = PartialIsometry.from_tuples((0,), (1,))
    with pytest.raises(BudgetExhausted):
        extend_partial_isometry(X, p, 2, 3)


def test_extend_katetov_route_alone():
    X = space([[0, F(1, 3), 1], [F(1, 3), 0, F(2, 3)], [1, F(2, 3), 0]])
    p = PartialIsometry.from_tuples((0,), (2,))
    ext = extend_partial_isometry(X, p, 3, 12, methods=("katetov",))
    assert ext.isometry.is_total_on(ext.space) and ext.isometry.is_isometry_of(ext.space)
    assert ext.isometry(0) == 2


@pytest.mark.parametrize("seed", range(15))
def test_extend_random(seed):
    rng = random.Random(seed)
    X = random_space(rng, rng.randint(1, 4), 3)
    p = random_partial_isometry(rng, X, X.n)
    ext = extend_partial_isometry(X, p, 6, 40)
    Y, s = ext.space, ext.isometry
    validate_premetric(Y.matrix.rows())
    assert Y.matrix.restrict(range(X.n)) == X.matrix
    assert sorted(s.image) == list(range(Y.n)) == sorted(s.domain)
    assert all(Y.d(s(a), s(b)) == Y.d(a, b) for a in range(Y.n) for b in range(Y.n))
    assert all(s(a) == b for a, b in p.pairs)


# --- oligomorphy ----------------------------------------------------------------------


def test_oligomorphy_examples():
    assert len(oligomorphy_witness(1, F(1, 3))) == 1
    assert len(oligomorphy_witness(2, F(1, 4))) == 5


# --- width decomposition -------------------------------------------------------------


def sym3_on_triangle():
    G, elems = from_permutations([(1, 0, 2), (1, 2, 0)])
    X = space([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    return FiniteGroupAction(G, X, tuple(elems))


def test_width_example_sym3():
    act = sym3_on_triangle()
    G = act.group
    wd = width_decomposition(act, (0,), F(1, 2))
    assert wd.U == frozenset(g for g in G.elements if act.act(g, 0) == 0)
    assert set(wd.factors) == set(G.elements) and len(G.elements) == 6
    for f, (u1, u2, h, u3) in wd.factors.items():
        assert G.product(u1, G.inv(u2), h, G.inv(u3)) == f
        assert {u1, u2, u3} <= wd.U and h in wd.H
    assert wd.factor_count == 4


def test_width_large_eps_trivial_h():
    act = sym3_on_triangle()
    wd = width_decomposition(act, (0,), F(2))
    assert wd.U == frozenset(act.group.elements)
    assert wd.H == frozenset({act.group.identity})


@pytest.mark.parametrize("seed", range(12))
def test_width_random_covers_group(seed):
    rng = random.Random(seed)
    G = rng.choice(group_corpus(12))
    act = random_isometric_action(rng, G, 3)
    xbar = (rng.randrange(act.space.n),)
    wd = width_decomposition(act, xbar, F(rng.randint(1, 4), 3))
    assert set(wd.factors) == set(G.elements)
    for f, (u1, u2, h, u3) in wd.factors.items():
        assert G.product(u1, G.inv(u2), h, G.inv(u3)) == f and {u1, u2, u3} <= wd.U
