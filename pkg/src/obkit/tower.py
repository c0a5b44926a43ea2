"""Exact arithmetic in real multiquadratic towers.

A tower ``Q(sqrt r1)(sqrt r2)...(sqrt rk)`` is described by its radicands;
``r_i`` is a positive non-square element of the level below. An element of
level ``k`` is stored recursively as a pair ``(a, b)`` meaning
``a + b sqrt(r_k)`` with ``a, b`` of level ``k - 1``; level 0 is a Fraction.
The flattened form has ``2**k`` rational coordinates.

Every square root is taken positive, so all towers embed compatibly in R and
elements of different towers can be compared after unification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

Rep = Union[Fraction, tuple]  # nested pairs bottoming out in Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


# --- nested representation arithmetic -------------------------------------------


def _zero(level: int) -> Rep:
    return ZERO if level == 0 else (_zero(level - 1), _zero(level - 1))


def _const(q: Fraction, level: int) -> Rep:
    return q if level == 0 else (_const(q, level - 1), _zero(level - 1))


def _lift(x: Rep, frm: int, to: int) -> Rep:
    for lv in range(frm, to):
        x = (x, _zero(lv))
    return x


def _is_zero(x: Rep) -> bool:
    if isinstance(x, tuple):
        return _is_zero(x[0]) and _is_zero(x[1])
    return x == 0


def _add(x: Rep, y: Rep) -> Rep:
    if isinstance(x, tuple):
        return (_add(x[0], y[0]), _add(x[1], y[1]))
    return x + y


def _neg(x: Rep) -> Rep:
    if isinstance(x, tuple):
        return (_neg(x[0]), _neg(x[1]))
    return -x


def _sub(x: Rep, y: Rep) -> Rep:
    return _add(x, _neg(y))


def _scale(x: Rep, q: Fraction) -> Rep:
    if isinstance(x, tuple):
        return (_scale(x[0], q), _scale(x[1], q))
    return x * q


def _mul(x: Rep, y: Rep, rads: tuple, level: int) -> Rep:
    if level == 0:
        return x * y
    a, b = x
    c, d = y
    lv = level - 1
    r = rads[lv]
    if _is_zero(b) and _is_zero(d):
        return (_mul(a, c, rads, lv), _zero(lv))
    ac = _mul(a, c, rads, lv)
    bd = _mul(b, d, rads, lv)
    ad = _mul(a, d, rads, lv)
    bc = _mul(b, c, rads, lv)
    return (_add(ac, _mul(bd, r, rads, lv)), _add(ad, bc))


def _inv(x: Rep, rads: tuple, level: int) -> Rep:
    if level == 0:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / x
    a, b = x
    lv = level - 1
    if _is_zero(b):
        return (_inv(a, rads, lv), b)
    # (a + b s)^-1 = (a - b s) / (a^2 - b^2 r)
    norm = _sub(_mul(a, a, rads, lv), _mul(_mul(b, b, rads, lv), rads[lv], rads, lv))
    ninv = _inv(norm, rads, lv)
    return (_mul(a, ninv, rads, lv), _neg(_mul(b, ninv, rads, lv)))


def _sign(x: Rep, rads: tuple, level: int) -> int:
    if level == 0:
        return (x > 0) - (x < 0)
    a, b = x
    lv = level - 1
    sa, sb = _sign(a, rads, lv), _sign(b, rads, lv)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # Opposite signs: compare a^2 with b^2 r.
    diff = _sub(_mul(a, a, rads, lv), _mul(_mul(b, b, rads, lv), rads[lv], rads, lv))
    return sa * _sign(diff, rads, lv)


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _find_sqrt(x: Rep, rads: tuple, level: int) -> Rep | None:
    """Nonnegative square root of ``x`` inside the given level, if one exists."""
    if _sign(x, rads, level) < 0:
        return None
    if level == 0:
        return _rational_sqrt(x)
    a, b = x
    lv = level - 1
    r = rads[lv]
    if _is_zero(b):
        s = _find_sqrt(a, rads, lv)
        if s is not None:
            return (s, _zero(lv))
        # a = c^2 r gives root c sqrt(r)
        c = _find_sqrt(_mul(a, _inv(r, rads, lv), rads, lv), rads, lv)
        if c is not None:
            return (_zero(lv), c)
        return None
    # (c + d s)^2 = a + b s  <=>  c^2 + d^2 r = a, 2cd = b
    n = _sub(_mul(a, a, rads, lv), _mul(_mul(b, b, rads, lv), r, rads, lv))
    s = _find_sqrt(n, rads, lv)
    if s is None:
        return None
    half = Fraction(1, 2)
    for c2 in (_scale(_add(a, s), half), _scale(_sub(a, s), half)):
        c = _find_sqrt(c2, rads, lv)
        if c is None or _is_zero(c):
            continue
        d = _mul(b, _inv(_scale(c, Fraction(2)), rads, lv), rads, lv)
        root = (c, d)
        if _sign(root, rads, level) < 0:
            root = _neg(root)
        return root
    return None


def _flatten(x: Rep) -> list[Fraction]:
    if isinstance(x, tuple):
        return _flatten(x[0]) + _flatten(x[1])
    return [x]


def _unflatten(coords, level: int) -> Rep:
    if level == 0:
        return Fraction(coords[0])
    h = len(coords) // 2
    return (_unflatten(coords[:h], level - 1), _unflatten(coords[h:], level - 1))


# --- towers ---------------------------------------------------------------------


@dataclass(frozen=True)
class Tower:
    """Radicands ``r_1..r_k``; ``r_i`` is a nested rep of level ``i - 1``."""

    radicands: tuple = ()

    @property
    def depth(self) -> int:
        return len(self.radicands)

    def is_prefix_of(self, other: "Tower") -> bool:
        return other.radicands[: self.depth] == self.radicands

    def prefix(self, depth: int) -> "Tower":
        return Tower(self.radicands[:depth])

    def radicand(self, i: int) -> "TowerElement":
        """``r_{i+1}`` as an element of the level below it."""
        return TowerElement(self.prefix(i), self.radicands[i])

    def adjoin(self, r: Rep) -> "Tower":
        return Tower(self.radicands + (r,))

    def describe(self) -> list[str]:
        return [str(self.radicand(i)) for i in range(self.depth)]


RATIONALS = Tower()


def _common(x: "TowerElement", y: "TowerElement") -> tuple[Tower, Rep, Rep]:
    if x.tower.is_prefix_of(y.tower):
        return y.tower, _lift(x.rep, x.tower.depth, y.tower.depth), y.rep
    if y.tower.is_prefix_of(x.tower):
        return x.tower, x.rep, _lift(y.rep, y.tower.depth, x.tower.depth)
    tower, ye = embed(y, x.tower)
    return tower, _lift(x.rep, x.tower.depth, tower.depth), ye.rep


def embed(y: "TowerElement", target: Tower) -> tuple[Tower, "TowerElement"]:
    """Express ``y`` over an extension of ``target`` by mapping its generators one at a time."""
    tower = target
    images: list[TowerElement] = []
    for i in range(y.tower.depth):
        root = _evaluate(y.tower.radicands[i], i, images, tower).sqrt()
        tower = root.tower
        images = [im.lift_to(tower) for im in images] + [root]
    val = _evaluate(y.rep, y.tower.depth, images, tower)
    return val.tower, val


def _evaluate(x: Rep, level: int, images: list["TowerElement"], tower: Tower) -> "TowerElement":
    if level == 0:
        return TowerElement(tower, _const(x, tower.depth))
    a, b = x
    return _evaluate(a, level - 1, images, tower) + _evaluate(b, level - 1, images, tower) * images[level - 1]


class TowerElement:
    """An exact real number in a quadratic tower."""

    __slots__ = ("tower", "rep")

    def __init__(self, tower: Tower, rep: Rep):
        self.tower = tower
        self.rep = rep

    # construction -----------------------------------------------------------------

    @classmethod
    def rational(cls, q) -> "TowerElement":
        if isinstance(q, float):
            raise TypeError("floats are not exact")
        return cls(RATIONALS, Fraction(q))

    @classmethod
    def from_coords(cls, tower: Tower, coords) -> "TowerElement":
        if len(coords) != 2**tower.depth:
            raise ValueError("need 2**depth coordinates")
        return cls(tower, _unflatten([Fraction(c) for c in coords], tower.depth))

    @staticmethod
    def coerce(v) -> "TowerElement":
        if isinstance(v, TowerElement):
            return v
        return TowerElement.rational(v)

    def lift_to(self, tower: Tower) -> "TowerElement":
        if self.tower == tower:
            return self
        if self.tower.is_prefix_of(tower):
            return TowerElement(tower, _lift(self.rep, self.tower.depth, tower.depth))
        t2, e = embed(self, tower)
        if t2 != tower:
            raise ValueError("element does not live in the target tower")
        return e

    def coords(self) -> list[Fraction]:
        return _flatten(self.rep)

    def simplify(self) -> "TowerElement":
        """Drop trailing levels whose coefficients vanish."""
        t, x = self.tower, self.rep
        while t.depth and _is_zero(x[1]):
            x = x[0]
            t = t.prefix(t.depth - 1)
        return TowerElement(t, x)

    # arithmetic -------------------------------------------------------------------

    def __add__(self, other) -> "TowerElement":
        other = TowerElement.coerce(other)
        t, a, b = _common(self, other)
        return TowerElement(t, _add(a, b))

    __radd__ = __add__

    def __neg__(self) -> "TowerElement":
        return TowerElement(self.tower, _neg(self.rep))

    def __sub__(self, other) -> "TowerElement":
        return self + (-TowerElement.coerce(other))

    def __rsub__(self, other) -> "TowerElement":
        return TowerElement.coerce(other) - self

    def __mul__(self, other) -> "TowerElement":
        if isinstance(other, (int, Fraction)):
            return TowerElement(self.tower, _scale(self.rep, Fraction(other)))
        other = TowerElement.coerce(other)
        t, a, b = _common(self, other)
        return TowerElement(t, _mul(a, b, t.radicands, t.depth))

    __rmul__ = __mul__

    def inverse(self) -> "TowerElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return TowerElement(self.tower, _inv(self.rep, self.tower.radicands, self.tower.depth))

    def __truediv__(self, other) -> "TowerElement":
        if isinstance(other, (int, Fraction)):
            return TowerElement(self.tower, _scale(self.rep, 1 / Fraction(other)))
        return self * TowerElement.coerce(other).inverse()

    def __rtruediv__(self, other) -> "TowerElement":
        return TowerElement.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "TowerElement":
        if n < 0:
            return self.inverse() ** (-n)
        out = TowerElement(self.tower, _const(ONE, self.tower.depth))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # order and equality --------------------------------------------------------------

    def is_zero(self) -> bool:
        return _is_zero(self.rep)

    def sign(self) -> int:
        return _sign(self.rep, self.tower.radicands, self.tower.depth)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (TowerElement, int, Fraction)):
            return NotImplemented
        return (self - TowerElement.coerce(other)).is_zero()

    def __hash__(self):
        # Equal irrationals may be written over different towers.
        s = self.simplify()
        return hash(s.rep) if s.tower.depth == 0 else hash("irrational")

    def __lt__(self, other) -> bool:
        return (self - TowerElement.coerce(other)).sign() < 0

    def __le__(self, other) -> bool:
        return (self - TowerElement.coerce(other)).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - TowerElement.coerce(other)).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - TowerElement.coerce(other)).sign() >= 0

    def __abs__(self) -> "TowerElement":
        return -self if self.sign() < 0 else self

    # square roots ------------------------------------------------------------------

    def sqrt(self) -> "TowerElement":
        """Nonnegative square root; adjoins a new level only if no root exists yet."""
        s = self.sign()
        if s < 0:
            raise ValueError("square root of a negative element")
        t = self.tower
        root = _find_sqrt(self.rep, t.radicands, t.depth)
        if root is not None:
            return TowerElement(t, root)
        # Prefer the shortest prefix that holds the element.
        simple = self.simplify()
        t2 = t.adjoin(_lift(simple.rep, simple.tower.depth, t.depth))
        return TowerElement(t2, (_zero(t.depth), _const(ONE, t.depth)))

    def to_float(self) -> float:
        """Approximate value, for display only."""
        return float(_approx(self.rep, self.tower.radicands, self.tower.depth))

    def __float__(self) -> float:
        return self.to_float()

    def __repr__(self) -> str:
        return f"TowerElement({self})"

    def __str__(self) -> str:
        return _format(self.rep, self.tower.depth)


def _approx(x: Rep, rads, level: int) -> float:
    if level == 0:
        return float(x)
    a, b = x
    r = _approx(rads[level - 1], rads, level - 1)
    return _approx(a, rads, level - 1) + _approx(b, rads, level - 1) * r**0.5


def _format(x: Rep, level: int) -> str:
    if level == 0:
        return str(x)
    a, b = x
    if _is_zero(b):
        return _format(a, level - 1)
    sa = "" if _is_zero(a) else _format(a, level - 1) + " + "
    return f"{sa}({_format(b, level - 1)})*s{level}"


def tower_element(value) -> TowerElement:
    return TowerElement.coerce(value)


def sqrt(value) -> TowerElement:
    return TowerElement.coerce(value).sqrt()


def unify(elements) -> tuple[Tower, list[TowerElement]]:
    """Lift a list of elements to one common tower."""
    elems = [TowerElement.coerce(e) for e in elements]
    tower = RATIONALS
    for e in elems:
        if tower.is_prefix_of(e.tower):
            tower = e.tower
        elif not e.tower.is_prefix_of(tower):
            tower, _ = embed(e, tower)
    return tower, [e.lift_to(tower) for e in elems]
