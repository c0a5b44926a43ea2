"""Cyclic order on rational points of the circle R/Z and PL circle maps."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .metric import rat


class CircularError(ValueError):
    pass


class NotCircular(CircularError):
    pass


class NotFactorizable(CircularError):
    """No pair (f, h) with f fixing the y-tuple and h fixing the x-tuple reproduces g."""


def point(v) -> Fraction:
    """Reduce a rational to its representative in [0, 1)."""
    q = rat(v)
    return q - (q.numerator // q.denominator)


def arc_length(a: Fraction, b: Fraction) -> Fraction:
    """Clockwise length from a to b, in [0, 1)."""
    return point(b - a)


def betweenness(x, y, z) -> bool:
    """True iff x, y, z are distinct and y is on the clockwise open arc from x to z."""
    x, y, z = point(x), point(y), point(z)
    if x == y or y == z or x == z:
        return False
    return arc_length(x, y) < arc_length(x, z)


def in_open_arc(p, a, b) -> bool:
    """Is p strictly inside the clockwise arc from a to b?  For a == b the arc is the circle minus a."""
    p, a, b = point(p), point(a), point(b)
    if p == a:
        return False
    if a == b:
        return True
    return betweenness(a, p, b)


def is_circular_config(points: Sequence) -> bool:
    pts = [point(p) for p in points]
    if len(set(pts)) != len(pts):
        return False
    n = len(pts)
    # Equivalent to checking every triple: the sequence winds around exactly once.
    if n <= 2:
        return True
    start = pts[0]
    offs = [arc_length(start, p) for p in pts]
    return all(offs[i] < offs[i + 1] for i in range(n - 1))


def is_circular_config_bruteforce(points: Sequence) -> bool:
    pts = [point(p) for p in points]
    n = len(pts)
    return all(
        betweenness(pts[i], pts[j], pts[k])
        for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)
    ) and len(set(pts)) == n


def midpoints(a: Fraction, b: Fraction, count: int) -> list[Fraction]:
    """``count`` evenly spaced points on the open clockwise arc from a to b."""
    length = arc_length(a, b) or Fraction(1)
    return [point(a + length * Fraction(i, count + 1)) for i in range(1, count + 1)]


# --- piecewise linear maps -----------------------------------------------------------


class PLCircleMap:
    """Orientation-preserving PL homeomorphism interpolating rational breakpoints.

    No breakpoint gives the identity; a single one gives a rotation.
    """

    __slots__ = ("inputs", "outputs")

    def __init__(self, breakpoints: Iterable[tuple]):
        pairs = {}
        for a, b in breakpoints:
            a, b = point(a), point(b)
            if pairs.get(a, b) != b:
                raise NotCircular(f"two outputs for input {a}")
            pairs[a] = b
        ins = sorted(pairs)
        outs = [pairs[a] for a in ins]
        if len(set(outs)) != len(outs):
            raise NotCircular("outputs are not distinct")
        if not is_circular_config(outs):
            raise NotCircular("outputs are not in the cyclic order of the inputs")
        self.inputs = tuple(ins)
        self.outputs = tuple(outs)

    @classmethod
    def identity(cls) -> "PLCircleMap":
        return cls(())

    @property
    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.inputs, self.outputs))

    def __call__(self, x) -> Fraction:
        x = point(x)
        n = len(self.inputs)
        if n == 0:
            return x
        if n == 1:
            return point(x + self.outputs[0] - self.inputs[0])
        i = bisect_right(self.inputs, x) - 1  # -1 wraps to the last breakpoint
        a0, b0 = self.inputs[i], self.outputs[i]
        a1, b1 = self.inputs[(i + 1) % n], self.outputs[(i + 1) % n]
        slope = arc_length(b0, b1) / arc_length(a0, a1)
        return point(b0 + arc_length(a0, x) * slope)

    def inverse(self) -> "PLCircleMap":
        return PLCircleMap(zip(self.outputs, self.inputs))

    def compose(self, inner: "PLCircleMap") -> "PLCircleMap":
        """``self ∘ inner`` as a PL map (breakpoints of both, pulled back)."""
        ins = set(inner.inputs) | {inner.inverse()(a) for a in self.inputs}
        if not ins:
            return PLCircleMap.identity()
        if len(ins) == 1 and not self.inputs:
            return PLCircleMap([(a, inner(a)) for a in ins])
        if len(ins) == 1:
            ins.add(point(next(iter(ins)) + Fraction(1, 2)))
        return PLCircleMap([(a, self(inner(a))) for a in ins])

    def fixes(self, pts: Iterable) -> bool:
        return all(self(p) == point(p) for p in pts)

    def preserves_order(self, probes: Iterable) -> bool:
        probes = sorted({point(p) for p in probes})
        return is_circular_config([self(p) for p in probes])

    def __repr__(self) -> str:
        body = ", ".join(f"{a}->{b}" for a, b in self.breakpoints)
        return f"PLCircleMap({body})"


# --- three-coset factorisation ------------------------------------------------------


@dataclass(frozen=True)
class ProduktFactorization:
    xbar: tuple
    ybar: tuple
    g_images: tuple
    interval: tuple  # indices i with g(x_i) strictly inside the arc from y_m to y_1 (0-based)
    f: PLCircleMap
    h: PLCircleMap
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.checks)


def _check_input(xbar, ybar, g_images):
    if len(g_images) != len(xbar):
        raise CircularError("one image per x point required")
    if not xbar or not ybar:
        raise CircularError("both tuples must be nonempty")
    if not is_circular_config(list(xbar) + list(ybar)):
        raise NotCircular("x followed by y is not in cyclic order")
    if not is_circular_config(g_images):
        raise NotCircular("images are not in the cyclic order of the x points")


def produkt_interval(xbar, ybar, g_images) -> tuple[int, ...]:
    ym, y1 = ybar[-1], ybar[0]
    if len(ybar) == 1:
        return ()
    return tuple(i for i, p in enumerate(g_images) if betweenness(ym, p, y1))


def is_factorizable(xbar: Sequence, g_images: Sequence) -> bool:
    """Closed-form test: the open arc from g(x_n) to g(x_1) must meet the gap (x_n, x_1)."""
    xbar = [point(p) for p in xbar]
    g = [point(p) for p in g_images]
    if len(xbar) == 1:
        return True
    xn, x1, gn, g1 = xbar[-1], xbar[0], g[-1], g[0]
    # Two open arcs meet iff one contains a start point of the other, or they share it.
    return gn == xn or in_open_arc(gn, xn, x1) or in_open_arc(xn, gn, g1)


def _try_cut(xbar, ybar, g, interval, big, prefix_len):
    n = len(xbar)
    x1, xn, y1, ym = xbar[0], xbar[-1], ybar[0], ybar[-1]
    inI = set(interval)
    fvals: list[Fraction | None] = [None] * n
    prefix = [i for i in range(n) if big[i] and i < prefix_len]
    suffix = [i for i in range(n) if big[i] and i >= prefix_len]
    for i in range(n):
        if not big[i]:
            fvals[i] = g[i]
    # The (y_m, x_1) side holds the prefix, the (x_n, y_1) side the suffix.
    kept_lo = [i for i in prefix if i in inI and in_open_arc(g[i], ym, x1)]
    kept_hi = [i for i in suffix if i in inI and in_open_arc(g[i], xn, y1)]
    for i in kept_lo + kept_hi:
        fvals[i] = g[i]
    free_lo = [i for i in prefix if fvals[i] is None]
    free_hi = [i for i in suffix if fvals[i] is None]
    q = min((fvals[i] for i in kept_lo), key=lambda p: arc_length(ym, p), default=x1)
    for i, p in zip(free_lo, midpoints(ym, q, len(free_lo))):
        fvals[i] = p
    p0 = max((fvals[i] for i in kept_hi), key=lambda p: arc_length(xn, p), default=xn)
    for i, p in zip(free_hi, midpoints(p0, y1, len(free_hi))):
        fvals[i] = p
    try:
        f = PLCircleMap([(y, y) for y in ybar] + list(zip(xbar, fvals)))
        h = PLCircleMap([(x, x) for x in xbar] + list(zip(fvals, g)))
    except NotCircular:
        return None
    return f, h


def produkt_factorization(xbar: Sequence, ybar: Sequence, g_images: Sequence) -> ProduktFactorization:
    """Find PL maps f fixing ``ybar`` and h fixing ``xbar`` with h(f(x_i)) = g(x_i).

    Points whose image already lies on the x side of ``ybar`` keep it; the
    others are parked at evenly spaced points next to ``y_m`` or ``y_1`` and
    moved into place by h.  The residual ``(hf)^-1 g`` then fixes ``xbar``.
    """
    xbar = tuple(point(p) for p in xbar)
    ybar = tuple(point(p) for p in ybar)
    g = tuple(point(p) for p in g_images)
    _check_input(xbar, ybar, g)
    n = len(xbar)
    interval = produkt_interval(xbar, ybar, g)
    x1, xn = xbar[0], xbar[-1]
    big = [in_open_arc(p, xn, x1) for p in g]  # image in the gap containing ybar
    found = None
    for prefix_len in range(n + 1):
        found = _try_cut(xbar, ybar, g, interval, big, prefix_len)
        if found is not None:
            break
    if found is None:
        raise NotFactorizable("no placement of f(x) is compatible with both stabilisers")
    f, h = found
    checks = (
        ("f fixes ybar", f.fixes(ybar)),
        ("h fixes xbar", h.fixes(xbar)),
        ("hf agrees with g on xbar", all(h(f(x)) == gx for x, gx in zip(xbar, g))),
        ("f preserves cyclic order", f.preserves_order(xbar + ybar + f.inputs)),
        ("h preserves cyclic order", h.preserves_order(xbar + g + h.inputs)),
    )
    result = ProduktFactorization(xbar, ybar, g, interval, f, h, checks)
    if not result.ok:
        raise AssertionError(f"certificate failed: {[c for c, v in checks if not v]}")
    return result
