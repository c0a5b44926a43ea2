"""JSON encodings of the library's objects.

Rationals travel as strings ``"p/q"`` (plain integers are accepted on input).
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .circular import point
from .groups import FiniteGroup, FiniteGroupAction, Filtration, SubsetChain
from .metric import DistanceMatrix, RationalMetricSpace, validate_premetric
from .tower import RATIONALS, Tower, TowerElement, unify
from .trees import FinitePerm, FreeWord, LineMap, SimplicialTree
from .unitary import FinitaryOperator, FinVector
from .urysohn import PartialIsometry


class FormatError(ValueError):
    """Input does not follow the expected JSON layout."""


def load(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def parse_rat(v) -> Fraction:
    if isinstance(v, bool) or isinstance(v, float):
        raise FormatError(f"not an exact rational: {v!r}")
    try:
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"not a rational: {v!r}") from exc


def format_rat(q: Fraction) -> str:
    return str(Fraction(q))


def _field(obj, key):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"missing field {key!r}")
    return obj[key]


def _int_list(v) -> list[int]:
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise FormatError(f"expected a list of integers, got {v!r}")
    return v


# --- metric-core / urysohn ------------------------------------------------------------


def matrix_from_json(obj) -> DistanceMatrix:
    entries = _field(obj, "entries")
    if not isinstance(entries, list):
        raise FormatError("entries must be a list of rows")
    rows = [[parse_rat(v) for v in r] for r in entries]
    if "n" in obj and obj["n"] != len(rows):
        raise FormatError("n does not match the number of rows")
    return validate_premetric(rows)


def matrix_to_json(M: DistanceMatrix) -> dict:
    return {"n": M.n, "entries": [[format_rat(v) for v in r] for r in M.entries]}


def space_from_json(obj) -> RationalMetricSpace:
    M = matrix_from_json(obj)
    strict = bool(obj.get("strict", M.is_strict()))
    return RationalMetricSpace(M, strict, tuple(obj["labels"]) if obj.get("labels") else None)


def space_to_json(X: RationalMetricSpace) -> dict:
    out = matrix_to_json(X.matrix)
    out["strict"] = X.strict
    if X.labels:
        out["labels"] = list(X.labels)
    return out


def map_from_json(obj) -> PartialIsometry:
    pairs = _field(obj, "map")
    try:
        return PartialIsometry(tuple(sorted((int(a), int(b)) for a, b in pairs)))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad map: {exc}") from exc


def map_to_json(p: PartialIsometry) -> dict:
    return {"map": [[a, b] for a, b in p.pairs]}


# --- trees --------------------------------------------------------------------------


def tree_from_json(obj) -> SimplicialTree:
    return SimplicialTree(int(_field(obj, "vertices")), _field(obj, "edges"))


def tree_to_json(T: SimplicialTree) -> dict:
    return {"vertices": T.V, "edges": [list(e) for e in T.edges]}


def automorphism_from_json(obj, tree: SimplicialTree | None = None):
    """``{"perm": [...]}`` on ``tree``, ``{"word": "ab A"}`` or ``{"line": [sign, shift]}``."""
    if isinstance(obj, dict) and "perm" in obj:
        if tree is None:
            raise FormatError("a permutation needs a tree")
        return FinitePerm(tree, tuple(_int_list(obj["perm"])))
    if isinstance(obj, dict) and "word" in obj:
        return FreeWord.parse(str(obj["word"]), int(obj.get("rank", 2)))
    if isinstance(obj, dict) and "line" in obj:
        sign, shift = _int_list(obj["line"])
        return LineMap(sign, shift)
    raise FormatError("automorphism needs 'perm', 'word' or 'line'")


def automorphism_to_json(g) -> dict:
    if isinstance(g, FinitePerm):
        return {"perm": list(g.perm)}
    if isinstance(g, FreeWord):
        return {"word": str(g), "rank": g.rank}
    if isinstance(g, LineMap):
        return {"line": [g.sign, g.shift]}
    raise TypeError(type(g))


# --- groups -------------------------------------------------------------------------


def group_from_json(obj) -> FiniteGroup:
    table = _field(obj, "table")
    if "order" in obj and obj["order"] != len(table):
        raise FormatError("order does not match the table")
    return FiniteGroup(table, name=str(obj.get("name", "")))


def group_to_json(G: FiniteGroup) -> dict:
    return {"order": G.order, "table": [list(r) for r in G.table]}


def action_from_json(obj, group: FiniteGroup, space: RationalMetricSpace) -> FiniteGroupAction:
    perms = _field(obj, "perm_per_element")
    return FiniteGroupAction(group, space, tuple(tuple(_int_list(p)) for p in perms))


def chain_from_json(obj) -> SubsetChain:
    return SubsetChain.of(_int_list(s) for s in _field(obj, "sets"))


def filtration_from_json(obj) -> Filtration:
    return Filtration.of(int(obj.get("start", 0)), (_int_list(s) for s in _field(obj, "sets")))


# --- towers and operators -------------------------------------------------------------


def tower_from_json(radicands) -> Tower:
    """Each radicand is a rational or a coordinate list over the levels below it."""
    tower = RATIONALS
    for i, r in enumerate(radicands or []):
        coords = r if isinstance(r, list) else [r]
        if len(coords) != 2**i:
            if len(coords) != 1:
                raise FormatError(f"radicand {i} needs {2**i} coordinates")
            coords = list(coords) + [0] * (2**i - 1)
        elem = TowerElement.from_coords(tower, [parse_rat(c) for c in coords])
        if elem.sign() <= 0:
            raise FormatError(f"radicand {i} must be positive")
        root = elem.sqrt()
        if root.tower.depth == tower.depth:
            raise FormatError(f"radicand {i} is already a square")
        tower = root.tower
    return tower


def tower_to_json(tower: Tower) -> list:
    return [[format_rat(c) for c in tower.radicand(i).coords()] for i in range(tower.depth)]


def element_from_json(v, tower: Tower) -> TowerElement:
    if isinstance(v, list):
        return TowerElement.from_coords(tower, [parse_rat(c) for c in v])
    return TowerElement.rational(parse_rat(v)).lift_to(tower)


def element_to_json(e: TowerElement) -> list[str]:
    return [format_rat(c) for c in e.coords()]


def operator_from_json(obj) -> FinitaryOperator:
    tower = tower_from_json(obj.get("tower", []))
    block = [[element_from_json(v, tower) for v in r] for r in _field(obj, "block")]
    return FinitaryOperator(block, int(obj.get("offset", 1)))


def operator_to_json(op: FinitaryOperator) -> dict:
    flat = [x for r in op.block for x in r]
    tower, lifted = unify(flat) if flat else (RATIONALS, [])
    m = op.size
    return {
        "tower": tower_to_json(tower),
        "offset": op.offset,
        "block": [[element_to_json(lifted[i * m + j]) for j in range(m)] for i in range(m)],
    }


def vectors_from_json(obj, key: str = "vectors") -> list[FinVector]:
    """``{"tower": [...], "offset": 1, key: [[elem, ...], ...]}``."""
    tower = tower_from_json(obj.get("tower", []))
    start = int(obj.get("offset", 1))
    return [
        FinVector({start + i: element_from_json(v, tower) for i, v in enumerate(vec)})
        for vec in _field(obj, key)
    ]


def vectors_to_json(vectors: list[FinVector]) -> dict:
    idx = [i for v in vectors for i in v.support()]
    lo, hi = (min(idx), max(idx)) if idx else (1, 0)
    elems = [v[i] for v in vectors for i in range(lo, hi + 1)]
    tower, lifted = unify(elems) if elems else (RATIONALS, [])
    w = hi - lo + 1
    return {
        "tower": tower_to_json(tower),
        "offset": lo,
        "vectors": [[element_to_json(lifted[k * w + i]) for i in range(w)] for k in range(len(vectors))],
    }


# --- circular -----------------------------------------------------------------------


def points_from_json(obj, key: str = "points") -> list[Fraction]:
    return [point(parse_rat(v)) for v in _field(obj, key)]


def points_to_json(pts) -> dict:
    return {"points": [format_rat(p) for p in pts]}
