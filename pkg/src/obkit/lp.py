"""Exact rational linear programming.

Solves ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0`` (so the all-slack
basis is feasible) by the primal simplex method on an integer dictionary.
Pivoting is fraction-free: every entry is stored as an integer numerator over
one shared denominator, and the Bareiss identity keeps all divisions exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence


class LPError(ValueError):
    pass


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple[Fraction, ...]
    pivots: int


def _common_denominator(values) -> int:
    den = 1
    for v in values:
        den = lcm(den, Fraction(v).denominator)
    return den


def maximize(
    c: Sequence,
    A: Sequence[Sequence],
    b: Sequence,
    *,
    max_pivots: int = 100_000,
) -> LPResult:
    """Maximize ``c.x`` over ``{x >= 0 : A x <= b}`` exactly.

    Requires every ``b[i] >= 0``. Entering variable: largest reduced cost
    (Dantzig), switching permanently to Bland's rule after a run of degenerate
    pivots so the method cannot cycle.
    """
    m = len(A)
    n = len(c)
    if len(b) != m:
        raise LPError("row count mismatch between A and b")
    if any(len(row) != n for row in A):
        raise LPError("every row of A must have len(c) entries")
    if any(Fraction(v) < 0 for v in b):
        raise LPError("right-hand side must be nonnegative")

    den = _common_denominator([*c, *b, *(v for row in A for v in row)])
    # Scaling everything by ``den`` gives an integer problem with the same
    # feasible set; Bareiss divisions are exact only from a unit start.
    # Row i: x_{basis[i]} = rhs[i]/d - sum_j T[i][j]/d * x_{nonbasis[j]}.
    # Row m is the objective, stored with negated reduced costs.
    T = [[int(Fraction(v) * den) for v in row] for row in A]
    rhs = [int(Fraction(v) * den) for v in b]
    T.append([-int(Fraction(v) * den) for v in c])
    rhs.append(0)
    d = 1
    nonbasis = list(range(n))
    basis = list(range(n, n + m))

    pivots = 0
    degenerate_run = 0
    bland = False
    obj = T[m]
    while True:
        s = -1
        if bland:
            best_var = None
            for j in range(n):
                if obj[j] < 0 and (best_var is None or nonbasis[j] < best_var):
                    best_var, s = nonbasis[j], j
        else:
            best = 0
            for j in range(n):
                if obj[j] < best:
                    best, s = obj[j], j
        if s < 0:
            break

        r = -1
        for i in range(m):
            a = T[i][s]
            if a > 0:
                if r < 0:
                    r = i
                    continue
                # compare rhs[i]/a with rhs[r]/T[r][s]
                lhs = rhs[i] * T[r][s]
                cur = rhs[r] * a
                if lhs < cur or (lhs == cur and basis[i] < basis[r]):
                    r = i
        if r < 0:
            raise LPError("objective is unbounded")

        if rhs[r] == 0:
            degenerate_run += 1
            if degenerate_run > 2 * (n + m):
                bland = True
        else:
            degenerate_run = 0

        p = T[r][s]
        row_r = T[r]
        rhs_r = rhs[r]
        for i in range(m + 1):
            if i == r:
                continue
            row = T[i]
            f = row[s]
            if f == 0:
                if p != d:
                    for j in range(n):
                        if j != s and row[j]:
                            row[j] = row[j] * p // d
                    rhs[i] = rhs[i] * p // d
                continue
            for j in range(n):
                if j != s:
                    row[j] = (row[j] * p - f * row_r[j]) // d
            rhs[i] = (rhs[i] * p - f * rhs_r) // d
            row[s] = -f
        row_r[s] = d
        d = p
        basis[r], nonbasis[s] = nonbasis[s], basis[r]
        pivots += 1
        if pivots > max_pivots:
            raise LPError("pivot limit exceeded")

    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = Fraction(rhs[i], d)
    value = Fraction(rhs[m], d * den)
    # Cheap exact certificate of the primal side.
    if any(sum(Fraction(a) * v for a, v in zip(row, x)) > Fraction(bi) for row, bi in zip(A, b)):
        raise AssertionError("simplex returned an infeasible point")
    if sum(Fraction(ci) * v for ci, v in zip(c, x)) != value:
        raise AssertionError("simplex value disagrees with its point")
    return LPResult(value=value, x=tuple(x), pivots=pivots)
