from __future__ import annotations

import itertools
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from obkit import metric
from obkit.metric import (
    GeodesicPoint,
    Violation,
    coupling_trace,
    d1_coupling,
    d1_distance,
    epsilon_net,
    geodesic_distance,
    geodesic_point,
    glue_premetric,
    holder_composition_bound,
    lipschitz_iterate,
    lipschitz_large_bound,
    original,
    round_to_grid,
    sup_distance,
    validate_premetric,
)

from conftest import closure, premetric_rows


def two_point(v):
    return validate_premetric([[0, v], [v, 0]])


def d1_scipy(A, B):
    """Float LP over the cross block c(i, j') written directly from the axioms."""
    n = A.n
    a = [[float(v) for v in r] for r in A.entries]
    b = [[float(v) for v in r] for r in B.entries]

    def var(i, j):
        return i * n + j

    rows, rhs = [], []
    for i, j, k in itertools.product(range(n), repeat=3):
        # triangles with two A points and one B point, and symmetrically
        r = np.zeros(n * n)
        r[var(i, j)] -= 1
        r[var(k, j)] += 1
        rows.append(r), rhs.append(a[i][k])  # c(i,j') <= a(i,k) + c(k,j')
        r = np.zeros(n * n)
        r[var(i, j)] += 1
        r[var(k, j)] += 1
        rows.append(-r), rhs.append(-a[i][k])  # a(i,k) <= c(i,j') + c(k,j')
        r = np.zeros(n * n)
        r[var(j, i)] -= 1
        r[var(j, k)] += 1
        rows.append(r), rhs.append(b[k][i])
        r = np.zeros(n * n)
        r[var(j, i)] += 1
        r[var(j, k)] += 1
        rows.append(-r), rhs.append(-b[i][k])
    cost = np.array([1.0 if v // n == v % n else 0.0 for v in range(n * n)])
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=[(0, 1)] * (n * n), method="highs")
    assert res.status == 0
    return res.fun


# --- validate ----------------------------------------------------------------------------


def test_validate_examples():
    assert validate_premetric([[0]]).n == 1
    assert validate_premetric([[0, F(1, 2)], [F(1, 2), 0]]).n == 2
    with pytest.raises(Violation) as exc:
        validate_premetric([[0, 1, F(1, 4)], [1, 0, F(1, 2)], [F(1, 4), F(1, 2), 0]])
    assert exc.value.kind == "triangle"
    assert exc.value.indices == (0, 2, 1)


@pytest.mark.parametrize(
    "rows,kind",
    [
        ([], "shape"),
        ([[0, 1]], "shape"),
        ([[1]], "diagonal"),
        ([[0, F(1, 2)], [F(1, 3), 0]], "asymmetry"),
        ([[0, 2], [2, 0]], "range"),
        ([[0, -1], [-1, 0]], "range"),
    ],
)
def test_validate_rejects(rows, kind):
    with pytest.raises(Violation) as exc:
        validate_premetric(rows)
    assert exc.value.kind == kind


def test_floats_rejected():
    with pytest.raises(TypeError):
        validate_premetric([[0, 0.5], [0.5, 0]])


def test_premetric_allows_zero_between_distinct_points():
    M = validate_premetric([[0, 0], [0, 0]])
    assert not M.is_strict()


@given(premetric_rows())
def test_closure_output_validates(rows):
    assert validate_premetric(rows).n == len(rows)


# --- sup distance ------------------------------------------------------------------------


def test_sup_distance_examples():
    A, B = two_point(1), two_point(F(1, 2))
    assert sup_distance(A, A) == 0
    assert sup_distance(A, B) == F(1, 2)
    M = validate_premetric([[0, F(1, 4), 1], [F(1, 4), 0, 1], [1, 1, 0]])
    P = M.restrict([2, 0, 1])
    assert sup_distance(M, P) > 0


def test_sup_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        sup_distance(two_point(1), validate_premetric([[0]]))


# --- glue --------------------------------------------------------------------------------


def test_glue_examples():
    A, B = two_point(1), two_point(F(1, 2))
    C = glue_premetric(A, B, F(1, 2))
    assert C[0, 2] == C[1, 3] == F(1, 4)
    assert coupling_trace(C) == F(1, 2)
    S = glue_premetric(A, A, 0)
    assert coupling_trace(S) == 0


def test_glue_rejects_small_delta():
    with pytest.raises(ValueError):
        glue_premetric(two_point(1), two_point(0), F(1, 2))


@given(premetric_rows(2, 5), st.data())
def test_glue_formula_and_trace(rows, data):
    n = len(rows)
    other = data.draw(premetric_rows(n, n))
    A, B = validate_premetric(rows), validate_premetric(other)
    delta = sup_distance(A, B) + F(data.draw(st.integers(0, 4)), 8)
    C = glue_premetric(A, B, delta)
    for i, j in itertools.product(range(n), repeat=2):
        expect = min(F(1), min(A[i, l] + delta / 2 + B[l, j] for l in range(n)))
        assert C[i, n + j] == expect
    assert C.restrict(range(n)) == A and C.restrict(range(n, 2 * n)) == B
    assert coupling_trace(C) <= n * delta / 2


# --- d1 ---------------------------------------------------------------------------------


def test_d1_examples():
    A, B = two_point(1), two_point(F(1, 2))
    assert d1_distance(A, B) == F(1, 2)
    assert d1_distance(A, A) == 0


@given(premetric_rows(2, 4), st.data())
def test_d1_matches_float_oracle(rows, data):
    n = len(rows)
    A = validate_premetric(rows)
    B = validate_premetric(data.draw(premetric_rows(n, n)))
    value, witness = d1_coupling(A, B)
    assert abs(float(value) - d1_scipy(A, B)) < 1e-7
    assert coupling_trace(witness) == value
    assert witness.restrict(range(n)) == A and witness.restrict(range(n, 2 * n)) == B


@given(premetric_rows(2, 5), st.data())
def test_d1_sandwich_and_symmetry(rows, data):
    n = len(rows)
    A = validate_premetric(rows)
    B = validate_premetric(data.draw(premetric_rows(n, n)))
    dinf = sup_distance(A, B)
    d1 = d1_distance(A, B)
    assert dinf <= d1 <= F(n, 2) * dinf
    assert d1 <= coupling_trace(glue_premetric(A, B, dinf))
    assert d1 == d1_distance(B, A)


# --- nets --------------------------------------------------------------------------------


def test_net_examples():
    assert epsilon_net(1, F(1, 2)) == [validate_premetric([[0]])]
    net = epsilon_net(2, F(1, 4))
    assert sorted(M[0, 1] for M in net) == [0, F(1, 4), F(1, 2), F(3, 4), 1]


def test_net_members_valid():
    for M in epsilon_net(3, F(1, 3)):
        validate_premetric(M.rows())


def grid_count_bruteforce(n, m):
    pairs = list(itertools.combinations(range(n), 2))
    count = 0
    for vals in itertools.product(range(m + 1), repeat=len(pairs)):
        rows = [[0] * n for _ in range(n)]
        for (i, j), v in zip(pairs, vals):
            rows[i][j] = rows[j][i] = F(v, m)
        try:
            validate_premetric(rows)
            count += 1
        except Violation:
            pass
    return count


@pytest.mark.parametrize("n,eps", [(3, F(1, 2)), (3, F(1, 3)), (4, F(1, 2))])
def test_net_size_matches_bruteforce(n, eps):
    assert len(epsilon_net(n, eps)) == grid_count_bruteforce(n, metric.grid_step(eps).denominator)


def test_net_coverage():
    rng = random.Random(7)
    nets = {(n, e): set(epsilon_net(n, e)) for n in (2, 3) for e in (F(1, 2), F(1, 3))}
    for _ in range(1000):
        n, eps = rng.choice(sorted(nets))
        rows = [[F(0)] * n for _ in range(n)]
        den = rng.randint(1, 12)
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = F(rng.randint(0, den), den)
        A = validate_premetric(closure(rows))
        assert min(sup_distance(A, N) for N in nets[(n, eps)]) <= eps
        assert round_to_grid(A, eps) in nets[(n, eps)]


# --- geodesic extension ----------------------------------------------------------------


def unit_space():
    return metric.RationalMetricSpace.from_rows(
        [[0, 1, F(1, 2), F(2, 3)], [1, 0, F(2, 3), F(1, 2)], [F(1, 2), F(2, 3), 0, 1], [F(2, 3), F(1, 2), 1, 0]],
        strict=True,
    )


def test_geodesic_examples():
    X = unit_space()
    for i, j in itertools.product(range(4), repeat=2):
        assert geodesic_distance(X, original(i), original(j)) == X.d(i, j)
    mid = geodesic_point(X, 0, 1, F(1, 2))
    assert geodesic_distance(X, mid, original(0)) == F(1, 2)
    assert geodesic_distance(X, mid, original(1)) == F(1, 2)


def test_geodesic_midpoints_four_routes():
    X = unit_space()
    p = geodesic_point(X, 0, 1, F(1, 2))
    q = geodesic_point(X, 2, 3, F(1, 2))
    routes = [
        F(1, 2) + X.d(0, 2) + F(1, 2),
        F(1, 2) + X.d(0, 3) + F(1, 2),
        F(1, 2) + X.d(1, 2) + F(1, 2),
        F(1, 2) + X.d(1, 3) + F(1, 2),
    ]
    assert geodesic_distance(X, p, q) == min(routes)


def test_geodesic_canonical_forms():
    X = unit_space()
    assert geodesic_point(X, 0, 1, 0) == original(0)
    assert geodesic_point(X, 0, 1, 1) == original(1)
    assert geodesic_point(X, 2, 2, 0) == original(2)
    with pytest.raises(ValueError):
        geodesic_point(X, 0, 2, 1)
    with pytest.raises(ValueError):
        geodesic_distance(X, GeodesicPoint(0, 1, F(2)), original(0))


def test_geodesic_same_segment():
    X = unit_space()
    p, q = geodesic_point(X, 0, 1, F(1, 4)), geodesic_point(X, 0, 1, F(3, 4))
    assert geodesic_distance(X, p, q) == F(1, 2)


@given(premetric_rows(2, 4, 3, strict=True), st.data())
def test_geodesic_realizes_intermediate_distances(rows, data):
    X = metric.RationalMetricSpace.from_rows(rows, strict=True)
    x, y = data.draw(st.sampled_from(list(itertools.permutations(range(X.n), 2))))
    t = X.d(x, y) * F(data.draw(st.integers(0, 12)), 12)
    p = geodesic_point(X, x, y, t)
    assert geodesic_distance(X, p, original(x)) == t
    assert geodesic_distance(X, p, original(y)) == X.d(x, y) - t


# --- Hölder / Lipschitz --------------------------------------------------------------


def test_holder_examples():
    assert holder_composition_bound([(1, 1)], 1).bound == 1
    assert lipschitz_large_bound([(2, 2), (2, 2)], 0).orbit_bound == 32
    for n in range(1, 8):
        hb = holder_composition_bound([(2, 1)] * n, 1)
        assert hb.constant == 2**n and hb.exponent == 1
        x = F(3, 7)
        y = x
        for _ in range(n):
            y = 2 * y
        assert y == hb.constant * x


def test_holder_formula():
    hb = holder_composition_bound([(3, F(1, 2)), (4, 2)], F(1, 4))
    # 3 * 4^(1/2) * (1/4)^(1) = 3 * 2 / 4
    assert hb.constant == 6 and hb.exponent == 1 and hb.bound == F(3, 2)


def test_power_upper_is_upper_bound():
    for base in (F(2), F(3, 5), F(7)):
        for e in (F(1, 2), F(1, 3), F(2, 3)):
            u = metric.power_upper(base, e)
            assert u ** e.denominator >= base ** e.numerator
            assert (u - F(1, 2**20)) ** e.denominator < base ** e.numerator


@given(
    st.lists(st.tuples(st.integers(1, 4), st.sampled_from([F(1, 2), F(1), F(2)])), min_size=1, max_size=3),
    st.integers(0, 3),
    st.integers(0, 2),
)
def test_holder_monotone(consts, d, bump_idx):
    base = holder_composition_bound(consts, F(d, 3)).bound
    assert holder_composition_bound(consts, F(d + 1, 3)).bound >= base
    i = bump_idx % len(consts)
    bumped = list(consts)
    bumped[i] = (consts[i][0] + 1, consts[i][1])
    assert holder_composition_bound(bumped, F(d, 3)).bound >= base


@given(st.integers(1, 4), st.integers(0, 4), st.integers(0, 6), st.integers(1, 5))
def test_lipschitz_iterate_below_bound(c, K, d, k):
    M = max(c, K, 1)
    assert lipschitz_iterate(c, K, d, k) <= lipschitz_large_bound([(c, K)] * k, d).displacement_bound
    assert lipschitz_large_bound([(c, K)] * k, d).displacement_bound == M**k * (d + k)
