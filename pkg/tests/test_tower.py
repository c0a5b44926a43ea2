from __future__ import annotations

from decimal import Decimal, getcontext
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from obkit.tower import RATIONALS, TowerElement, sqrt, tower_element, unify

getcontext().prec = 80


def decimal_value(e: TowerElement) -> Decimal:
    """High-precision evaluation, independent of the exact sign routine."""

    def ev(rep, level):
        if level == 0:
            return Decimal(rep.numerator) / Decimal(rep.denominator)
        a, b = rep
        r = ev(e.tower.radicands[level - 1], level - 1)
        return ev(a, level - 1) + ev(b, level - 1) * r.sqrt()

    return ev(e.rep, e.tower.depth)


def build_tower(depth):
    """Generators of a depth-``depth`` tower: sqrt2, sqrt3, sqrt(1 + sqrt2), sqrt5."""
    gens = []
    s2 = sqrt(2)
    gens.append(s2)
    if depth > 1:
        gens.append(sqrt(3))
    if depth > 2:
        gens.append((1 + s2).sqrt())
    if depth > 3:
        gens.append(sqrt(5))
    return gens


rats = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def elements(draw, depth=None):
    depth = draw(st.integers(0, 4)) if depth is None else depth
    gens = build_tower(depth) if depth else []
    e = tower_element(draw(rats))
    for g in gens:
        e = e + g * draw(rats) + g * g * draw(rats) * draw(rats)
    # A product term mixes levels.
    if gens and draw(st.booleans()):
        e = e * (gens[-1] + draw(rats))
    return e


def test_sqrt2_examples():
    r = sqrt(2)
    assert r * r == 2
    assert r.tower.depth == 1
    assert (F(1, 2) * r) * (F(1, 2) * r) * 2 == 1
    assert sqrt(4) == 2 and sqrt(4).tower == RATIONALS
    assert sqrt(F(9, 4)) == F(3, 2)


def test_sqrt_found_inside_tower():
    r2 = sqrt(2)
    x = 3 + 2 * r2  # (1 + sqrt2)^2
    root = x.sqrt()
    assert root.tower == r2.tower
    assert root == 1 + r2
    assert sqrt(8).tower.depth == 1 and sqrt(8) == 2 * r2


def test_negative_sqrt_rejected():
    with pytest.raises(ValueError):
        sqrt(-1)
    with pytest.raises(ValueError):
        (1 - sqrt(2)).sqrt()


def test_sign_examples():
    assert (sqrt(2) - F(141, 100)).sign() == 1
    assert (sqrt(2) - F(142, 100)).sign() == -1
    assert (sqrt(2) + sqrt(3) - sqrt(10)).sign() == -1  # 5 + 2 sqrt6 < 10
    assert (sqrt(2) * sqrt(3) - sqrt(6)).is_zero()


def test_unify_independent_roots():
    a, b = sqrt(2), sqrt(3)
    tower, (x, y) = unify([a, b])
    assert tower.depth == 2
    assert x * x == 2 and y * y == 3
    assert unify([sqrt(2), sqrt(8)])[0].depth == 1


def test_floats_rejected():
    with pytest.raises(TypeError):
        tower_element(0.5)


@given(elements(), elements())
def test_ring_identities(a, b):
    assert (a + b) - b == a
    assert a * b == b * a
    assert (a + b) * (a - b) == a * a - b * b


@given(elements())
def test_inverse(a):
    if a.is_zero():
        with pytest.raises(ZeroDivisionError):
            a.inverse()
    else:
        assert a * a.inverse() == 1


@given(elements())
def test_sqrt_squares_back(a):
    x = a * a
    r = x.sqrt()
    assert r * r == x
    assert r.sign() >= 0
    assert r == abs(a)


@given(elements(), elements())
def test_sign_matches_decimal(a, b):
    d = a - b
    val = decimal_value(d)
    s = d.sign()
    if s == 0:
        assert abs(val) < Decimal(10) ** -60
    else:
        assert (val > 0) == (s > 0)
        assert (a < b) == (s < 0)


@given(elements(depth=4))
def test_coords_roundtrip(a):
    b = TowerElement.from_coords(a.tower, a.coords())
    assert a == b and len(a.coords()) == 16
