"""``obkit`` command line: single operations and seeded verification suites.

Exit codes: 0 all checks pass, 1 some check fails, 2 bad input, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable

from . import circular, groups, io, metric, suites, trees, unitary, urysohn
from .suites import CheckResult

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


class Budget(Exception):
    def __init__(self, result: dict, message: str):
        super().__init__(message)
        self.result = result


def _check(name: str, lemma: str, ok: bool | None, witness: str = "") -> CheckResult:
    status = "inapplicable" if ok is None else ("pass" if ok else "fail")
    return CheckResult(name, lemma, status, witness, 0)


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma separated integers: {text!r}") from exc


def _rats(text: str) -> list[Fraction]:
    try:
        return [io.parse_rat(t.strip()) for t in text.split(",") if t.strip()]
    except io.FormatError as exc:
        raise InputError(str(exc)) from exc


def _fmt(x) -> str:
    return str(x)


# --- metric ---------------------------------------------------------------------------------


def cmd_metric_validate(a):
    obj = io.load(a.matrix)
    try:
        rows = [[io.parse_rat(v) for v in r] for r in obj["entries"]]
    except (KeyError, TypeError) as exc:
        raise InputError("matrix needs an 'entries' list") from exc
    try:
        M = metric.validate_premetric(rows)
    except metric.Violation as v:
        return [_check("metric.validate", "pre-metric space D_n", False, f"{v.kind} {list(v.indices)}")], {
            "valid": False, "kind": v.kind, "indices": list(v.indices)}
    return [_check("metric.validate", "pre-metric space D_n", True, f"n={M.n}")], {
        "valid": True, "n": M.n, "strict": M.is_strict()}


def cmd_metric_d1(a):
    A, B = io.matrix_from_json(io.load(a.a)), io.matrix_from_json(io.load(a.b))
    if A.n != B.n:
        raise InputError("matrices differ in size")
    n = A.n
    dinf = metric.sup_distance(A, B)
    d1, coupling = metric.d1_coupling(A, B)
    trace = metric.coupling_trace(metric.glue_premetric(A, B, dinf))
    lemma = "d1 lemma: 2 d1 <= n d_inf <= n d1"
    checks = [
        _check("metric.d1.sandwich", lemma, dinf <= d1 <= Fraction(n, 2) * dinf, f"{dinf} <= {d1} <= {n}/2 * {dinf}"),
        _check("metric.d1.glue_trace", "d1 lemma: gluing construction", d1 <= trace, f"{d1} <= {trace}"),
    ]
    return checks, {"d1": _fmt(d1), "d_inf": _fmt(dinf), "glue_trace": _fmt(trace),
                    "coupling": io.matrix_to_json(coupling)}


def cmd_metric_net(a):
    eps = io.parse_rat(a.eps)
    if a.n < 1 or eps <= 0:
        raise InputError("need n >= 1 and eps > 0")
    net = metric.epsilon_net(a.n, eps)
    result = {"n": a.n, "eps": _fmt(eps), "grid_step": _fmt(metric.grid_step(eps)), "count": len(net)}
    if a.emit:
        result["matrices"] = [io.matrix_to_json(M) for M in net]
    ok = all(M == metric.validate_premetric(M.rows()) for M in net)
    return [_check("metric.net.valid", "Theorem urysohn: eps-dense finite subset of D_n", ok, f"{len(net)} matrices")], result


def cmd_metric_glue(a):
    A, B = io.matrix_from_json(io.load(a.a)), io.matrix_from_json(io.load(a.b))
    delta = io.parse_rat(a.delta) if a.delta is not None else metric.sup_distance(A, B)
    try:
        C = metric.glue_premetric(A, B, delta)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    n = A.n
    trace = metric.coupling_trace(C)
    lemma = "d1 lemma: gluing construction"
    checks = [
        _check("metric.glue.restricts", lemma, C.restrict(range(n)) == A and C.restrict(range(n, 2 * n)) == B),
        _check("metric.glue.trace", lemma, trace <= n * delta / 2, f"{trace} <= {n * delta / 2}"),
    ]
    return checks, {"glued": io.matrix_to_json(C), "trace": _fmt(trace), "delta": _fmt(delta)}


def _geo_point(X, text):
    parts = text.split(",")
    if len(parts) == 1:
        return metric.original(int(parts[0]))
    if len(parts) != 3:
        raise InputError("points are 'x' or 'x,y,t'")
    try:
        return metric.geodesic_point(X, int(parts[0]), int(parts[1]), io.parse_rat(parts[2]))
    except (ValueError, IndexError) as exc:
        raise InputError(str(exc)) from exc


def cmd_metric_geodesic(a):
    X = io.space_from_json(io.load(a.space))
    p, q = _geo_point(X, a.p), _geo_point(X, a.q)
    d = metric.geodesic_distance(X, p, q)
    anchors = [metric.original(i) for i in range(X.n)]
    tri = all(
        d <= metric.geodesic_distance(X, p, r) + metric.geodesic_distance(X, r, q) for r in anchors
    )
    checks = [
        _check("metric.geodesic.symmetric", "Theorem basic 5=>1: geodesic extension", d == metric.geodesic_distance(X, q, p)),
        _check("metric.geodesic.triangle", "Theorem basic 5=>1: geodesic extension", tri, "through every original point"),
    ]
    return checks, {"distance": _fmt(d)}


# --- urysohn --------------------------------------------------------------------------------


def cmd_urysohn_katetov(a):
    X = io.space_from_json(io.load(a.space))
    fs = urysohn.katetov_extensions(X, a.denom, positive=a.positive)
    ok = all(urysohn.is_katetov(X, f.values) for f in fs)
    return [_check("urysohn.katetov", "Katetov one-point extension", ok, f"{len(fs)} functions")], {
        "count": len(fs), "functions": [[_fmt(v) for v in f.values] for f in fs]}


def cmd_urysohn_amalgam(a):
    X = io.space_from_json(io.load(a.space))
    try:
        am = urysohn.amalgamate_over(X, _ints(a.xbar), _ints(a.zbar), _ints(a.ybar))
    except urysohn.PreconditionError as exc:
        raise InputError(str(exc)) from exc
    Y = am.space
    lemma = "Theorem urysohn: free amalgam over ybar"
    checks = [
        _check("urysohn.amalgam.extends", lemma, Y.matrix.restrict(range(X.n)) == X.matrix),
        _check("urysohn.amalgam.copies", lemma, urysohn.tuples_isometric(
            Y, am.ybar + am.xbar + am.zbar, am.ybar + am.xbar_copy + am.zbar_copy)),
    ]
    return checks, {"space": io.space_to_json(Y), "xbar_copy": list(am.xbar_copy), "zbar_copy": list(am.zbar_copy)}


def cmd_urysohn_factor4(a):
    X = io.space_from_json(io.load(a.space))
    g = io.map_from_json(io.load(a.map))
    xbar = _ints(a.xbar) if a.xbar else list(g.domain)
    try:
        ff = urysohn.four_factor_decomposition(X, xbar, g)
    except urysohn.PreconditionError as exc:
        raise InputError(str(exc)) from exc
    except urysohn.CertificateError as exc:
        return [_check("urysohn.factor4", "Theorem urysohn: four-factor decomposition", False, str(exc))], {}
    lemma = "Theorem urysohn: four-factor decomposition"
    checks = [_check(f"urysohn.factor4.{name.replace(' ', '_')}", lemma, ok) for name, ok in ff.certificate.checks]
    return checks, {
        "space": io.space_to_json(ff.space), "ybar": list(ff.ybar),
        "h": io.map_to_json(ff.h)["map"], "f": io.map_to_json(ff.f)["map"], "k": io.map_to_json(ff.k)["map"],
        "word": list(ff.certificate.factors),
    }


def cmd_urysohn_extend(a):
    X = io.space_from_json(io.load(a.space))
    p = io.map_from_json(io.load(a.map))
    try:
        ext = urysohn.extend_partial_isometry(X, p, a.denom, a.budget)
    except urysohn.PreconditionError as exc:
        raise InputError(str(exc)) from exc
    except urysohn.BudgetExhausted as exc:
        raise Budget({"budget": a.budget, "best": repr(exc.best)}, str(exc)) from exc
    s = ext.isometry
    lemma = "Solecki extension of partial isometries"
    checks = [
        _check("urysohn.extend.total", lemma, s.is_total_on(ext.space)),
        _check("urysohn.extend.isometry", lemma, s.is_isometry_of(ext.space)),
        _check("urysohn.extend.extends", lemma, all(s(x) == y for x, y in p.pairs)),
    ]
    return checks, {"method": ext.method, "space": io.space_to_json(ext.space), "map": io.map_to_json(s)["map"]}


def _group_action(a):
    G = io.group_from_json(io.load(a.group))
    X = io.space_from_json(io.load(a.space))
    return G, X, io.action_from_json(io.load(a.action), G, X)


def cmd_urysohn_width(a):
    G, X, act = _group_action(a)
    try:
        wd = urysohn.width_decomposition(act, _ints(a.xbar), io.parse_rat(a.eps))
    except urysohn.PreconditionError as exc:
        raise InputError(str(exc)) from exc
    except urysohn.DensityFailure as exc:
        return [_check("urysohn.width", "Prop width: U A' U factorisation", False, f"{exc} {exc.witness}")], {}
    ok = all(G.product(u1, G.inv(u2), h, G.inv(u3)) == f for f, (u1, u2, h, u3) in wd.factors.items())
    return [_check("urysohn.width.factors", "Prop width: U A' U factorisation", ok, f"{len(wd.factors)} elements")], {
        "U": sorted(wd.U), "H": sorted(wd.H), "A": len(wd.A), "B": len(wd.B),
        "factors": {str(f): list(v) for f, v in sorted(wd.factors.items())}}


# --- trees -----------------------------------------------------------------------------------


def _tree(a):
    return io.tree_from_json(io.load(a.tree)) if a.tree else None


def _aut(path, T):
    return io.automorphism_from_json(io.load(path), T)


def cmd_tree_classify(a):
    T = _tree(a)
    g = _aut(a.g, T)
    c = trees.classify(g)
    out = {"kind": c.kind, "norm": c.norm}
    if isinstance(c.subtree, trees.FixedSet):
        out["fixed"] = "all" if c.subtree.vertices is None else sorted(c.subtree.vertices)
    elif isinstance(c.subtree, trees.Axis):
        out["axis"] = {"conjugator": trees.format_word(c.subtree.conjugator), "period": trees.format_word(c.subtree.period)}
    else:
        out["edge"] = list(c.subtree.edge)
    ok = trees.min_displacement(g) == c.norm if isinstance(g, trees.FinitePerm) else True
    return [_check("tree.classify", "translation length and characteristic subtree", ok)], out


def _identity(fn, name, lemma):
    def run(a):
        T = _tree(a)
        g, h = _aut(a.g, T), _aut(a.h, T)
        try:
            res = fn(g, h)
        except trees.Inapplicable as exc:
            return [_check(name, lemma, None, str(exc))], {"applicable": False}
        return [_check(name, lemma, res.holds, f"lhs={res.lhs} rhs={res.rhs} {res.detail}".strip())], {
            "applicable": True, "lhs": res.lhs, "rhs": res.rhs}
    return run


def cmd_tree_macpherson(a):
    T = io.tree_from_json(io.load(a.tree))
    ks = [_aut(p, T) for p in (a.k0, a.k1, a.k2)]
    try:
        x = trees.macpherson_fixed_point(T, *ks)
    except trees.PreconditionError as exc:
        return [_check("tree.macpherson", "Theorem macpherson: common fixed vertex", None, str(exc))], {}
    k0, k1, k2 = ks
    return [_check("tree.macpherson", "Theorem macpherson: common fixed vertex", (k0 * k1 * k0 * k2)(x) == x)], {"vertex": x}


# --- unitary ---------------------------------------------------------------------------------


def cmd_unitary_gs(a):
    vecs = io.vectors_from_json(io.load(a.vectors))
    out = unitary.gram_schmidt(vecs)
    checks = [
        _check("unitary.gs.orthonormal", "Lemma gram", unitary.is_orthonormal(out)),
        _check("unitary.gs.span", "Lemma gram", all(unitary.in_span(v, out) for v in vecs)),
    ]
    return checks, io.vectors_to_json(out)


def cmd_unitary_extend(a):
    obj = io.load(a.map)
    srcs, tgts = io.vectors_from_json(obj, "sources"), io.vectors_from_json(obj, "targets")
    try:
        R = unitary.extend_partial_isometry(srcs, tgts)
    except unitary.IsometryMismatch as exc:
        raise InputError(str(exc)) from exc
    checks = [
        _check("unitary.extend.orthogonal", "Lemma hrushovski: finitary extension", R.is_orthogonal()),
        _check("unitary.extend.extends", "Lemma hrushovski: finitary extension",
               all(R.apply(s) == t for s, t in zip(srcs, tgts))),
    ]
    return checks, io.operator_to_json(R)


def cmd_unitary_paste(a):
    blocks = [io.operator_from_json(b) for b in io.load(a.blocks)["blocks"]]
    try:
        P = unitary.block_paste(blocks)
    except unitary.UnitaryError as exc:
        raise InputError(str(exc)) from exc
    return [_check("unitary.paste.orthogonal", "Prop ample: block pasting", P.is_orthogonal())], io.operator_to_json(P)


def cmd_unitary_shiftwin(a):
    obj = io.load(a.family)
    schedule = [tuple(io.operator_from_json(b) for b in tup) for tup in obj["schedule"]]
    fam = unitary.AmpleFamily.build(schedule)
    targets = [io.operator_from_json(t) for t in io.load(a.targets)["targets"]]
    try:
        n = unitary.shift_conjugate_window(fam, targets, a.k)
    except unitary.NotInSchedule as exc:
        return [_check("unitary.shiftwin", "Prop cyclic: shift-conjugate window", False, str(exc))], {}
    ok = unitary.verify_shift_window(fam, targets, a.k, n)
    return [_check("unitary.shiftwin", "Prop cyclic: shift-conjugate window", ok, f"n={n}")], {"n": n}


def cmd_unitary_bergman(a):
    T = io.operator_from_json(io.load(a.op))
    try:
        bf = unitary.bergman_factorization(T, a.k)
    except unitary.UnitaryError as exc:
        raise InputError(str(exc)) from exc
    lemma = "Prop Bergman: U^-1 M U^-1 M^-1 U"
    checks = [_check(f"unitary.bergman.{n.replace(' ', '_')}", lemma, ok) for n, ok in bf.checks]
    return checks, {
        "M": io.operator_to_json(bf.M), "R0": io.operator_to_json(bf.R0), "R1": io.operator_to_json(bf.R1),
        "residual": io.operator_to_json(bf.residual), "word": list(bf.word)}


# --- groups ----------------------------------------------------------------------------------


def cmd_group_chain(a):
    G = io.group_from_json(io.load(a.group))
    chain = groups.normalize_chain(G, io.chain_from_json(io.load(a.chain)).sets)
    try:
        groups.check_chain(G, chain)
    except groups.GroupError as exc:
        raise InputError(str(exc)) from exc
    dist = [groups.chain_distances(G, chain, f) for f in G.elements]
    inv = all(dist[G.mul(c, f)][G.mul(c, g)] == dist[f][g] for c in G.elements for f in G.elements for g in G.elements)
    n, k = groups.chain_bound(G, chain)
    return [_check("group.chain.left_invariant", "Theorem basic 2=>3: chain metric", inv)], {
        "bound": {"n": n, "k": k}, "diameter": max(max(r) for r in dist)}


def cmd_group_birkhoff(a):
    G = io.group_from_json(io.load(a.group))
    filt = io.filtration_from_json(io.load(a.filtration))
    try:
        groups.check_filtration(G, filt)
    except groups.FiltrationViolation as exc:
        return [_check("group.birkhoff.filtration", "Lemma birkhoff", False, str(exc))], {}
    delta, d = groups.birkhoff_tables(G, filt)
    bad = [(x, y) for x in G.elements for y in G.elements if not delta[x][y] <= 2 * d[x][y] <= 2 * delta[x][y]]
    return [_check("group.birkhoff.sandwich", "Lemma birkhoff: delta <= 2d <= 2delta", not bad, str(bad[:1]))], {
        "d": [[_fmt(v) for v in r] for r in d]}


def cmd_group_width(a):
    G = io.group_from_json(io.load(a.group))
    try:
        w = groups.cayley_width(G, _ints(a.set))
    except groups.NotGenerating as exc:
        return [_check("group.width", "Cayley width", False, str(exc))], {}
    except groups.GroupError as exc:
        raise InputError(str(exc)) from exc
    return [_check("group.width", "Cayley width", True, f"width={w}")], {"width": w}


def cmd_group_square(a):
    G = io.group_from_json(io.load(a.group))
    try:
        rep = groups.large_subset_square(G, _ints(a.set))
    except groups.GroupError as exc:
        raise InputError(str(exc)) from exc
    ok = rep.covers or not rep.majority
    return [_check("group.square", "large symmetric subsets square to G", ok, f"majority={rep.majority}")], {
        "majority": rep.majority, "covers": rep.covers, "missing": list(rep.missing)}


def cmd_group_induce(a):
    G = io.group_from_json(io.load(a.group))
    H = _ints(a.subgroup)
    if not G.is_subgroup(frozenset(H)):
        raise InputError("not a subgroup")
    Hg, idx = groups.restrict_group(G, H)
    X = io.space_from_json(io.load(a.space))
    base = io.action_from_json(io.load(a.action), Hg, X)
    T = groups.subgroup_transversal(G, H)
    try:
        ind = groups.induce_action(G, H, T, base, idx)
    except groups.GroupError as exc:
        raise InputError(str(exc)) from exc
    lemma = "finite index induced action"
    checks = [
        _check("group.induce.isometric", lemma, ind.action.is_isometric()),
        _check("group.induce.orbit_bound", lemma, groups.orbit_bound_violation(ind) is None),
    ]
    return checks, {"transversal": list(T), "points": len(ind.points)}


# --- circular ---------------------------------------------------------------------------------


def cmd_circular_between(a):
    x, y, z = (io.parse_rat(v) for v in (a.x, a.y, a.z))
    b = circular.betweenness(x, y, z)
    return [_check("circular.between", "betweenness relation B", True, str(b))], {"between": b}


def cmd_circular_config(a):
    pts = io.points_from_json(io.load(a.points)) if a.points else _rats(a.list or "")
    c = circular.is_circular_config(pts)
    ok = c == circular.is_circular_config_bruteforce(pts)
    return [_check("circular.config", "circular configurations", ok, str(c))], {"circular": c}


def cmd_circular_produkt(a):
    obj = io.load(a.config)
    xbar, ybar, g = (io.points_from_json(obj, k) for k in ("xbar", "ybar", "g"))
    lemma = "Lemma produkt"
    try:
        res = circular.produkt_factorization(xbar, ybar, g)
    except circular.NotFactorizable as exc:
        return [_check("circular.produkt", lemma, False, str(exc))], {"factorizable": False}
    except circular.CircularError as exc:
        raise InputError(str(exc)) from exc
    checks = [_check(f"circular.produkt.{n.replace(' ', '_')}", lemma, ok) for n, ok in res.checks]
    pairs = lambda m: [[_fmt(p), _fmt(q)] for p, q in m.breakpoints]  # noqa: E731
    return checks, {"factorizable": True, "interval": list(res.interval), "f": pairs(res.f), "h": pairs(res.h)}


# --- suites -------------------------------------------------------------------------------------


def _threads() -> int:
    env = os.environ.get("OBKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError("OBKIT_THREADS must be an integer")
    return min(8, os.cpu_count() or 1)


def cmd_suite(a):
    try:
        specs = suites.suite_specs(a.module)
    except KeyError:
        raise InputError(f"unknown suite {a.module!r}; choose all or one of {sorted(suites.SUITES)}")
    if a.samples < 1:
        raise InputError("--samples must be positive")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda s: suites.run_check(s, a.seed, a.samples), specs))
    return results, {"suite": a.module, "seed": a.seed, "samples": a.samples}


# --- parser and report ---------------------------------------------------------------------------


COMMANDS: dict[str, dict[str, tuple[Callable, Callable]]] = {}


def _add(group: str, name: str, fn: Callable, setup: Callable = lambda p: None):
    COMMANDS.setdefault(group, {})[name] = (fn, setup)


def _req(*names):
    def setup(p):
        for n in names:
            p.add_argument(f"--{n}", required=True)
    return setup


def _setup_tree_pair(p):
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--tree")


_add("metric", "validate", cmd_metric_validate, _req("matrix"))
_add("metric", "d1", cmd_metric_d1, _req("a", "b"))
_add("metric", "net", cmd_metric_net, lambda p: (p.add_argument("--n", type=int, required=True),
                                                  p.add_argument("--eps", required=True),
                                                  p.add_argument("--emit", action="store_true")))
_add("metric", "glue", cmd_metric_glue, lambda p: (_req("a", "b")(p), p.add_argument("--delta")))
_add("metric", "geodesic", cmd_metric_geodesic, _req("space", "p", "q"))
_add("urysohn", "katetov", cmd_urysohn_katetov, lambda p: (_req("space")(p), p.add_argument("--denom", type=int, default=4),
                                                            p.add_argument("--positive", action="store_true")))
_add("urysohn", "amalgam", cmd_urysohn_amalgam, _req("space", "xbar", "zbar", "ybar"))
_add("urysohn", "factor4", cmd_urysohn_factor4, lambda p: (_req("space", "map")(p), p.add_argument("--xbar")))
_add("urysohn", "extend", cmd_urysohn_extend, lambda p: (_req("space", "map")(p),
                                                          p.add_argument("--denom", type=int, default=4),
                                                          p.add_argument("--budget", type=int, default=40)))
_add("urysohn", "width", cmd_urysohn_width, _req("group", "action", "space", "xbar", "eps"))
_add("tree", "classify", cmd_tree_classify, lambda p: (p.add_argument("--g", required=True), p.add_argument("--tree")))
_add("tree", "cm1", _identity(trees.cm_disjoint_identity, "tree.cm1", "Lemma cm1: disjoint characteristic subtrees"), _setup_tree_pair)
_add("tree", "cm2", _identity(trees.cm_max_identity, "tree.cm2", "Lemma cm2: meeting axes"), _setup_tree_pair)
_add("tree", "serre", _identity(trees.serre_check, "tree.serre", "Serre's Lemma"), _setup_tree_pair)
_add("tree", "macpherson", cmd_tree_macpherson, _req("tree", "k0", "k1", "k2"))
_add("unitary", "gs", cmd_unitary_gs, _req("vectors"))
_add("unitary", "extend", cmd_unitary_extend, _req("map"))
_add("unitary", "paste", cmd_unitary_paste, _req("blocks"))
_add("unitary", "shiftwin", cmd_unitary_shiftwin, lambda p: (_req("family", "targets")(p),
                                                              p.add_argument("--k", type=int, required=True)))
_add("unitary", "bergman", cmd_unitary_bergman, lambda p: (_req("op")(p), p.add_argument("--k", type=int, required=True)))
_add("group", "chain", cmd_group_chain, _req("group", "chain"))
_add("group", "birkhoff", cmd_group_birkhoff, _req("group", "filtration"))
_add("group", "width", cmd_group_width, _req("group", "set"))
_add("group", "square", cmd_group_square, _req("group", "set"))
_add("group", "induce", cmd_group_induce, _req("group", "subgroup", "action", "space"))
_add("circular", "between", cmd_circular_between, _req("x", "y", "z"))
_add("circular", "config", cmd_circular_config, lambda p: (p.add_argument("--points"), p.add_argument("--list")))
_add("circular", "produkt", cmd_circular_produkt, _req("config"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--out")
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--timing", action="store_true", help="include per-check microseconds")

    parser = argparse.ArgumentParser(prog="obkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)
    for group, cmds in COMMANDS.items():
        gp = sub.add_parser(group)
        gsub = gp.add_subparsers(dest="command", required=True)
        for name, (fn, setup) in cmds.items():
            p = gsub.add_parser(name, parents=[common])
            setup(p)
            p.set_defaults(handler=fn)
    sp = sub.add_parser("suite", parents=[common])
    sp.add_argument("module", help="all or one of " + ", ".join(sorted(suites.SUITES)))
    sp.set_defaults(handler=cmd_suite, command=None)
    return parser


def _status(checks: list[CheckResult]) -> str:
    statuses = {c.status for c in checks}
    if "fail" in statuses:
        return "fail"
    if "budget" in statuses:
        return "budget"
    return "pass"


def render(command: str, checks: list[CheckResult], result: dict, fmt: str, timing: bool) -> str:
    checks = sorted(checks, key=lambda c: c.name)
    if fmt == "tsv":
        lines = ["check_name\tstatus\twitness_summary\tmicros"]
        for c in checks:
            witness = " ".join(c.witness.split())
            lines.append(f"{c.name}\t{c.status}\t{witness}\t{c.micros if timing else '-'}")
        return "\n".join(lines) + "\n"
    recs = []
    for c in checks:
        rec = {"name": c.name, "lemma": c.lemma, "status": c.status, "witness": c.witness}
        if timing:
            rec["micros"] = c.micros
        recs.append(rec)
    return io.dumps({"command": command, "status": _status(checks), "checks": recs, "result": result}) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)  # exits with code 2 on usage errors
    command = a.group if a.command is None else f"{a.group} {a.command}"
    if a.group == "suite":
        command = f"suite {a.module}"
    code = EXIT_OK
    try:
        checks, result = a.handler(a)
    except Budget as exc:
        checks = [CheckResult(command.replace(" ", "."), "search budget", "budget", str(exc), 0)]
        result = exc.result
    except (InputError, io.FormatError, metric.Violation, trees.TreeError, groups.GroupError,
            unitary.UnitaryError, circular.CircularError, urysohn.PreconditionError, KeyError, TypeError,
            ValueError) as exc:
        print(f"obkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status = _status(checks)
    if status == "fail":
        code = EXIT_FAIL
    elif status == "budget":
        code = EXIT_BUDGET
    text = render(command, checks, result, a.format, a.timing)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
