"""Exact orthogonal operators on a space with basis ``(e_i)``.

Vectors are finitely supported maps from integer indices to tower elements.
Operators are the identity outside one finite window of indices, which
covers both the N-indexed (offset 1) and Z-indexed settings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .tower import TowerElement, tower_element, unify

TE = TowerElement
_ZERO = tower_element(0)
_ONE = tower_element(1)


class UnitaryError(ValueError):
    pass


class IsometryMismatch(UnitaryError):
    def __init__(self, i: int, j: int, lhs, rhs):
        super().__init__(f"inner products differ at ({i}, {j}): {lhs} != {rhs}")
        self.indices = (i, j)


# --- vectors ----------------------------------------------------------------------


class FinVector:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        out = {}
        for i, v in (coeffs or {}).items():
            e = tower_element(v)
            if not e.is_zero():
                out[int(i)] = e
        self.coeffs: dict[int, TE] = out

    @classmethod
    def basis(cls, i: int) -> "FinVector":
        return cls({i: 1})

    @classmethod
    def from_list(cls, values: Sequence, start: int = 1) -> "FinVector":
        return cls({start + k: v for k, v in enumerate(values)})

    def __getitem__(self, i: int) -> TE:
        return self.coeffs.get(i, _ZERO)

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "FinVector") -> "FinVector":
        out = dict(self.coeffs)
        for i, v in other.coeffs.items():
            out[i] = out[i] + v if i in out else v
        return FinVector(out)

    def __neg__(self) -> "FinVector":
        return FinVector({i: -v for i, v in self.coeffs.items()})

    def __sub__(self, other: "FinVector") -> "FinVector":
        return self + (-other)

    def scale(self, c) -> "FinVector":
        c = tower_element(c)
        return FinVector({i: v * c for i, v in self.coeffs.items()})

    def inner(self, other: "FinVector") -> TE:
        acc = _ZERO
        small, big = (self, other) if len(self.coeffs) <= len(other.coeffs) else (other, self)
        for i, v in small.coeffs.items():
            w = big.coeffs.get(i)
            if w is not None:
                acc = acc + v * w
        return acc

    def norm2(self) -> TE:
        return self.inner(self)

    def norm(self) -> TE:
        return self.norm2().sqrt()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinVector):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {v}" for i, v in sorted(self.coeffs.items()))
        return f"FinVector({{{body}}})"


def inner(u: FinVector, v: FinVector) -> TE:
    return u.inner(v)


def gram_matrix(vectors: Sequence[FinVector]) -> list[list[TE]]:
    return [[u.inner(v) for v in vectors] for u in vectors]


def is_orthonormal(vectors: Sequence[FinVector]) -> bool:
    for i, u in enumerate(vectors):
        for j in range(i, len(vectors)):
            if u.inner(vectors[j]) != (1 if i == j else 0):
                return False
    return True


# --- Gram-Schmidt -------------------------------------------------------------------


def gram_schmidt(vectors: Sequence[FinVector], prefix: Sequence[FinVector] = ()) -> list[FinVector]:
    """Orthonormal list extending ``prefix`` whose span also contains ``vectors``.

    Dependent inputs (zero residual) are skipped. Norms come from exact square
    roots, so the tower grows as needed.
    """
    basis = list(prefix)
    if not is_orthonormal(basis):
        raise UnitaryError("prefix is not orthonormal")
    for v in vectors:
        y = v
        for w in basis:
            c = v.inner(w)
            if not c.is_zero():
                y = y - w.scale(c)
        if y.is_zero():
            continue
        basis.append(y.scale(y.norm().inverse()))
    return basis


def coordinates(v: FinVector, basis: Sequence[FinVector]) -> list[TE]:
    """Coefficients of ``v`` against an orthonormal ``basis``."""
    return [v.inner(w) for w in basis]


def in_span(v: FinVector, basis: Sequence[FinVector]) -> bool:
    y = v
    for w, c in zip(basis, coordinates(v, basis)):
        y = y - w.scale(c)
    return y.is_zero()


# --- finitary operators -------------------------------------------------------------


class FinitaryOperator:
    """``block`` acts on ``e_offset .. e_{offset+m-1}``; identity on every other index."""

    __slots__ = ("offset", "block")

    def __init__(self, block: Sequence[Sequence], offset: int = 1):
        m = len(block)
        if any(len(r) != m for r in block):
            raise UnitaryError("block must be square")
        self.offset = int(offset)
        self.block = tuple(tuple(tower_element(v) for v in r) for r in block)

    @property
    def size(self) -> int:
        return len(self.block)

    @property
    def window(self) -> range:
        return range(self.offset, self.offset + self.size)

    @classmethod
    def identity(cls, size: int = 0, offset: int = 1) -> "FinitaryOperator":
        return cls([[1 if i == j else 0 for j in range(size)] for i in range(size)], offset)

    @classmethod
    def from_columns(cls, columns: Sequence[FinVector], offset: int) -> "FinitaryOperator":
        m = len(columns)
        return cls([[columns[j][offset + i] for j in range(m)] for i in range(m)], offset)

    @classmethod
    def permutation(cls, mapping: Mapping[int, int]) -> "FinitaryOperator":
        """Send ``e_i`` to ``e_mapping[i]`` (indices not listed are fixed)."""
        idx = set(mapping) | set(mapping.values())
        if not idx:
            return cls.identity()
        lo, hi = min(idx), max(idx)
        cols = [FinVector.basis(mapping.get(i, i)) for i in range(lo, hi + 1)]
        return cls.from_columns(cols, lo)

    def entry(self, i: int, j: int) -> TE:
        if i in self.window and j in self.window:
            return self.block[i - self.offset][j - self.offset]
        return _ONE if i == j else _ZERO

    def column(self, j: int) -> FinVector:
        if j not in self.window:
            return FinVector.basis(j)
        return FinVector({self.offset + i: self.block[i][j - self.offset] for i in range(self.size)})

    def expand(self, lo: int, hi: int) -> "FinitaryOperator":
        """Same operator with its window enlarged to ``[lo, hi]``."""
        if self.size:
            lo, hi = min(lo, self.offset), max(hi, self.offset + self.size - 1)
        if hi < lo:
            return self
        return FinitaryOperator(
            [[self.entry(i, j) for j in range(lo, hi + 1)] for i in range(lo, hi + 1)], lo
        )

    def apply(self, v: FinVector) -> FinVector:
        out: dict[int, TE] = {}
        for j, c in v.coeffs.items():
            if j in self.window:
                col = j - self.offset
                for i in range(self.size):
                    a = self.block[i][col]
                    if not a.is_zero():
                        k = self.offset + i
                        out[k] = out[k] + a * c if k in out else a * c
            else:
                out[j] = out[j] + c if j in out else c
        return FinVector(out)

    def __call__(self, v: FinVector) -> FinVector:
        return self.apply(v)

    def _common(self, other: "FinitaryOperator") -> tuple["FinitaryOperator", "FinitaryOperator"]:
        idx = [i for op in (self, other) for i in (op.offset, op.offset + op.size - 1) if op.size]
        if not idx:
            return self, other
        lo, hi = min(idx), max(idx)
        return self.expand(lo, hi), other.expand(lo, hi)

    def __matmul__(self, other: "FinitaryOperator") -> "FinitaryOperator":
        a, b = self._common(other)
        m = a.size
        rows = [
            [sum((a.block[i][k] * b.block[k][j] for k in range(m)), _ZERO) for j in range(m)]
            for i in range(m)
        ]
        return FinitaryOperator(rows, a.offset)

    def transpose(self) -> "FinitaryOperator":
        m = self.size
        return FinitaryOperator([[self.block[j][i] for j in range(m)] for i in range(m)], self.offset)

    def inverse(self) -> "FinitaryOperator":
        """Transpose, after checking orthogonality."""
        if not self.is_orthogonal():
            raise UnitaryError("operator is not orthogonal")
        return self.transpose()

    def is_orthogonal(self) -> bool:
        m = self.size
        B = self.block
        for i in range(m):
            for j in range(i, m):
                s = sum((B[k][i] * B[k][j] for k in range(m)), _ZERO)
                if s != (1 if i == j else 0):
                    return False
        return True

    def equals(self, other: "FinitaryOperator") -> bool:
        a, b = self._common(other)
        return all(a.block[i][j] == b.block[i][j] for i in range(a.size) for j in range(a.size))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitaryOperator):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def is_identity(self) -> bool:
        return self.equals(FinitaryOperator.identity())

    def fixes(self, vectors: Iterable[FinVector]) -> bool:
        return all(self.apply(v) == v for v in vectors)

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(str(x) for x in r) for r in self.block)
        return f"FinitaryOperator(offset={self.offset}, [{rows}])"


# --- extension of partial isometries ----------------------------------------------


def _span_range(vectors: Iterable[FinVector], lo: int | None = None) -> tuple[int, int]:
    idx = [i for v in vectors for i in v.support()]
    if lo is not None:
        idx.append(lo)
    if not idx:
        return (1, 0)
    return min(idx), max(idx)


def check_isometric(sources: Sequence[FinVector], targets: Sequence[FinVector]) -> None:
    if len(sources) != len(targets):
        raise UnitaryError("sources and targets differ in number")
    n = len(sources)
    for i in range(n):
        for j in range(i, n):
            a, b = sources[i].inner(sources[j]), targets[i].inner(targets[j])
            if a != b:
                raise IsometryMismatch(i, j, a, b)


def extend_partial_isometry(
    sources: Sequence[FinVector],
    targets: Sequence[FinVector],
    *,
    lo: int | None = None,
) -> FinitaryOperator:
    """Finitary orthogonal operator sending ``sources[i]`` to ``targets[i]``.

    The Gram matrices must agree exactly. Both families are orthonormalised
    in parallel, completed by the standard basis of the smallest window that
    holds them, and matched column by column.
    """
    check_isometric(sources, targets)
    start, end = _span_range(list(sources) + list(targets), lo)
    if end < start:
        return FinitaryOperator.identity()
    U: list[FinVector] = []
    V: list[FinVector] = []
    for s, t in zip(sources, targets):
        y, z = s, t
        for u, v in zip(U, V):
            c = s.inner(u)
            if not c.is_zero():
                y = y - u.scale(c)
                z = z - v.scale(c)
        if y.is_zero():
            if not z.is_zero():
                raise UnitaryError("dependent sources with independent targets")
            continue
        nrm = y.norm().inverse()
        U.append(y.scale(nrm))
        V.append(z.scale(nrm))
    std = [FinVector.basis(i) for i in range(start, end + 1)]
    U = gram_schmidt(std, U)
    V = gram_schmidt(std, V)
    m = end - start + 1
    assert len(U) == len(V) == m
    # Matrix sum_j v_j u_j^T.
    rows = [
        [sum((V[j][start + r] * U[j][start + c] for j in range(m)), _ZERO) for c in range(m)]
        for r in range(m)
    ]
    op = FinitaryOperator(rows, start)
    for s, t in zip(sources, targets):
        if op.apply(s) != t:
            raise AssertionError("extension does not reproduce the partial map")
    return op


# --- block pasting and the ample schedule ------------------------------------------


def block_paste(blocks: Sequence[FinitaryOperator], start: int = 1) -> FinitaryOperator:
    """Block-diagonal operator with ``blocks[j]`` on consecutive index ranges."""
    rows: list[list[TE]] = []
    total = sum(b.size for b in blocks)
    pos = 0
    for b in blocks:
        if not b.is_orthogonal():
            raise UnitaryError("every block must be orthogonal")
        for i in range(b.size):
            row = [_ZERO] * total
            for j in range(b.size):
                row[pos + j] = b.block[i][j]
            rows.append(row)
        pos += b.size
    return FinitaryOperator(rows, start)


def block_bounds(sizes: Sequence[int]) -> list[int]:
    """``b_0 = 0, b_j = b_{j-1} + size_j``; block ``j`` is ``[b_{j-1}+1, b_j]``."""
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


BlockTuple = tuple  # tuple of FinitaryOperators with equal size, offset 0


def signed_permutation_blocks(m: int) -> list[FinitaryOperator]:
    """All ``m x m`` signed permutation matrices, ordered lexicographically by entries."""
    rows = []
    for perm in itertools.permutations(range(m)):
        for signs in itertools.product((-1, 1), repeat=m):
            rows.append(tuple(tuple(signs[i] if perm[i] == j else 0 for j in range(m)) for i in range(m)))
    return [FinitaryOperator(r, 0) for r in sorted(set(rows))]


def block_tuple_enumeration(arity: int, max_size: int) -> list[BlockTuple]:
    """Deterministic list of ``arity``-tuples of blocks: by size, then entries."""
    out: list[BlockTuple] = []
    for m in range(1, max_size + 1):
        out.extend(itertools.product(signed_permutation_blocks(m), repeat=arity))
    return out


def ample_schedule(enumeration: Sequence[BlockTuple], rounds: int) -> list[BlockTuple]:
    """``K1; K1, K2; K1, K2, K3; ...`` so that each tuple recurs in every later round."""
    out: list[BlockTuple] = []
    for r in range(1, rounds + 1):
        out.extend(enumeration[: min(r, len(enumeration))])
    return out


@dataclass(frozen=True)
class AmpleFamily:
    """Operators ``H_1..H_t``; block ``j`` of ``H_s`` is component ``s`` of ``schedule[j-1]``."""

    schedule: tuple
    operators: tuple
    bounds: tuple

    @classmethod
    def build(cls, schedule: Sequence[BlockTuple]) -> "AmpleFamily":
        if not schedule:
            raise UnitaryError("empty schedule")
        t = len(schedule[0])
        for tup in schedule:
            if len(tup) != t or len({b.size for b in tup}) != 1:
                raise UnitaryError("each schedule entry must be a tuple of equal-size blocks")
        sizes = [tup[0].size for tup in schedule]
        ops = tuple(block_paste([tup[s] for tup in schedule], start=1) for s in range(t))
        return cls(tuple(schedule), ops, tuple(block_bounds(sizes)))


def shift_conjugate(op: FinitaryOperator, n: int) -> FinitaryOperator:
    """``S^-n op S^n`` for the bilateral shift ``S e_i = e_{i+1}``."""
    return FinitaryOperator(op.block, op.offset - n)


def window_operator(target: FinitaryOperator, k: int) -> FinitaryOperator:
    """``target`` written on the window ``[-k, k]``."""
    if target.size and (target.offset < -k or target.offset + target.size - 1 > k):
        raise UnitaryError("target acts outside the window")
    return target.expand(-k, k)


def verify_shift_window(family: AmpleFamily, targets: Sequence[FinitaryOperator], k: int, n: int) -> bool:
    """Does ``S^-n H_s S^n`` agree with ``targets[s]`` on ``e_-k .. e_k`` for every ``s``?"""
    for H, T in zip(family.operators, targets):
        C = shift_conjugate(H, n)
        for i in range(-k, k + 1):
            e = FinVector.basis(i)
            if C.apply(e) != T.apply(e):
                return False
    return True


class NotInSchedule(UnitaryError):
    pass


def shift_conjugate_window(family: AmpleFamily, targets: Sequence[FinitaryOperator], k: int) -> int:
    """Least-block shift ``n = b_{j-1} + 1 + k`` bringing block ``j`` onto the window."""
    if len(targets) != len(family.operators):
        raise UnitaryError("one target per operator required")
    wins = [window_operator(T, k) for T in targets]
    m = 2 * k + 1
    for j, tup in enumerate(family.schedule, start=1):
        if tup[0].size != m:
            continue
        if all(
            tup[s].block[a][b] == wins[s].block[a][b]
            for s in range(len(tup))
            for a in range(m)
            for b in range(m)
        ):
            n = family.bounds[j - 1] + 1 + k
            if not verify_shift_window(family, targets, k, n):
                raise AssertionError("conjugate does not match on the window")
            return n
    raise NotInSchedule("target tuple does not occur in the schedule")


# --- bounded-width factorisation ------------------------------------------------------


@dataclass(frozen=True)
class BergmanFactorization:
    T: FinitaryOperator
    k: int
    M: FinitaryOperator
    R0: FinitaryOperator
    R1: FinitaryOperator
    residual: FinitaryOperator
    H0: tuple
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.checks)

    @property
    def word(self) -> tuple[str, ...]:
        return ("U^-1", "M", "U^-1", "M^-1", "U")


def swap_blocks(k: int) -> FinitaryOperator:
    """``e_i <-> e_{k+i}`` for ``1 <= i <= k``."""
    return FinitaryOperator.permutation({**{i: k + i for i in range(1, k + 1)}, **{k + i: i for i in range(1, k + 1)}})


def bergman_factorization(T: FinitaryOperator, k: int) -> BergmanFactorization:
    """``T = R0^-1 R1^-1 (R1 R0 T)`` with ``R0``, ``R1 R0 T`` fixing ``W0`` and ``R1`` fixing ``W1``.

    ``W0 = span(e_1..e_k)``, ``W1 = span(e_{k+1}..e_{2k})`` and ``M`` swaps them,
    so ``R1`` lies in ``M U M^-1`` with ``U`` the pointwise stabiliser of ``W0``.
    """
    if k < 1:
        raise UnitaryError("k must be positive")
    if not T.is_orthogonal():
        raise UnitaryError("T is not orthogonal")
    if T.size and T.offset < 1:
        raise UnitaryError("T must act on indices >= 1")
    W0 = [FinVector.basis(i) for i in range(1, k + 1)]
    W1 = [FinVector.basis(k + i) for i in range(1, k + 1)]
    M = swap_blocks(k)
    images = [T.apply(e) for e in W0]

    # H0: orthonormalised projections of T[W0] onto the complement of W0 + W1.
    proj = [FinVector({i: c for i, c in v.coeffs.items() if i > 2 * k}) for v in images]
    H0 = gram_schmidt([p for p in proj if not p.is_zero()])
    top = max([2 * k] + [i for v in images + H0 for i in v.support()]
              + ([T.offset + T.size - 1] if T.size else []))

    meets_W1 = any(not v[k + i].is_zero() for v in images for i in range(1, k + 1))
    if meets_W1:
        # R0 fixes W0 + H0 and moves W1 to fresh indices beyond everything so far.
        fresh = [FinVector.basis(top + i) for i in range(1, k + 1)]
        R0 = extend_partial_isometry(W0 + H0 + W1, W0 + H0 + fresh, lo=1)
    else:
        R0 = FinitaryOperator.identity()
    moved = [R0.apply(v) for v in images]
    R1 = extend_partial_isometry(moved + W1, W0 + W1, lo=1)
    residual = R1 @ R0 @ T
    product = R0.inverse() @ R1.inverse() @ residual
    MinvR1M = M.inverse() @ R1 @ M
    checks = (
        ("T orthogonal", T.is_orthogonal()),
        ("M orthogonal", M.is_orthogonal()),
        ("R0 orthogonal", R0.is_orthogonal()),
        ("R1 orthogonal", R1.is_orthogonal()),
        ("M maps W0 onto W1", [M.apply(e) for e in W0] == W1),
        ("T[W0] inside W0+W1+H0", all(in_span(v, W0 + W1 + H0) for v in images)),
        ("R0 fixes W0", R0.fixes(W0)),
        ("R0 fixes H0", R0.fixes(H0)),
        ("R0 moves W1 off W0+W1+H0", not meets_W1 or all(
            R0.apply(w).inner(b).is_zero() for w in W1 for b in W0 + W1 + H0)),
        ("R1 fixes W1", R1.fixes(W1)),
        ("R1 in M U M^-1", MinvR1M.fixes(W0)),
        ("R1 R0 T fixes W0", residual.fixes(W0)),
        ("product reproduces T", product.equals(T)),
    )
    result = BergmanFactorization(T, k, M, R0, R1, residual, tuple(H0), checks)
    if not result.ok:
        failed = [name for name, v in checks if not v]
        raise AssertionError(f"factorisation certificate failed: {failed}")
    return result


# --- approximation on finite sets -----------------------------------------------------


@dataclass(frozen=True)
class Approximation:
    operator: FinitaryOperator
    errors2: tuple  # squared errors ||y_i - R x_i||^2
    route: str


class GramMismatch(UnitaryError):
    pass


def approximate_on_finite_set(pairs: Sequence[tuple[FinVector, FinVector]], eps) -> Approximation:
    """Finitary ``R`` with ``||y_i - R x_i|| <= eps`` for every pair.

    Exact Gram agreement gives an exact extension. Otherwise both families
    are orthonormalised separately and matched; the resulting errors are
    compared with ``eps`` exactly through their squares.
    """
    eps = tower_element(eps)
    if eps.sign() < 0:
        raise ValueError("eps must be nonnegative")
    xs = [x for x, _ in pairs]
    ys = [y for _, y in pairs]
    try:
        check_isometric(xs, ys)
        exact = True
    except IsometryMismatch:
        exact = False
    if exact:
        R = extend_partial_isometry(xs, ys)
        route = "exact"
    else:
        U = gram_schmidt(xs)
        V = gram_schmidt(ys)
        if len(U) != len(V):
            raise GramMismatch("families span spaces of different dimension")
        R = extend_partial_isometry(U, V)
        route = "gram-schmidt"
    errs = tuple((y - R.apply(x)).norm2() for x, y in pairs)
    eps2 = eps * eps
    for i, e in enumerate(errs):
        if e > eps2:
            raise GramMismatch(f"pair {i}: squared error {e} exceeds eps^2 = {eps2}")
    return Approximation(R, errs, route)


def rational_vector(values: Sequence, start: int = 1) -> FinVector:
    return FinVector.from_list([Fraction(v) for v in values], start)


def unify_operator(op: FinitaryOperator) -> FinitaryOperator:
    """Rewrite all entries over one common tower (handy before serialising)."""
    flat = [x for r in op.block for x in r]
    _, lifted = unify(flat)
    m = op.size
    return FinitaryOperator([lifted[i * m:(i + 1) * m] for i in range(m)], op.offset)
