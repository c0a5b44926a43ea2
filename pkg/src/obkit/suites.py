"""Seeded verification suites, one per module, run by ``obkit suite``.

Each check draws its own generator from ``(seed, check name)`` so results do
not depend on which other checks run or in which order.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import circular, groups, metric, trees, unitary, urysohn
from .instances import (
    random_isometric_action,
    random_orthogonal,
    random_partial_isometry,
    random_premetric,
    random_produkt_instance,
    random_rational_vector,
    random_space,
)
from .tower import tower_element


@dataclass(frozen=True)
class Outcome:
    status: str  # "pass" | "fail" | "inapplicable" | "budget"
    witness: str


@dataclass(frozen=True)
class CheckResult:
    name: str
    lemma: str
    status: str
    witness: str
    micros: int


@dataclass(frozen=True)
class CheckSpec:
    name: str
    lemma: str
    run: Callable[[random.Random, int], Outcome]


class _Fail(Exception):
    pass


def _require(cond: bool, witness) -> None:
    if not cond:
        raise _Fail(str(witness))


def _passed(count: int, what: str = "instances") -> Outcome:
    if count == 0:
        return Outcome("inapplicable", f"no applicable {what}")
    return Outcome("pass", f"{count} {what}")


# --- metric-core ---------------------------------------------------------------------------


def _triangle_ok(rows) -> bool:
    n = len(rows)
    return all(rows[i][k] <= rows[i][j] + rows[j][k] for i in range(n) for j in range(n) for k in range(n))


def check_validate(rng, samples):
    for _ in range(samples):
        n = rng.randint(1, 5)
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = Fraction(rng.randint(0, 4), 4)
        try:
            metric.validate_premetric(rows)
            ok = True
        except metric.Violation:
            ok = False
        _require(ok == _triangle_ok(rows), rows)
    return _passed(samples, "matrices")


def check_d1_sandwich(rng, samples):
    for _ in range(samples):
        n = rng.randint(2, 5)
        A = random_premetric(rng, n, rng.randint(1, 8))
        B = random_premetric(rng, n, rng.randint(1, 8))
        dinf = metric.sup_distance(A, B)
        d1 = metric.d1_distance(A, B)
        trace = metric.coupling_trace(metric.glue_premetric(A, B, dinf))
        _require(dinf <= d1 <= Fraction(n, 2) * dinf and d1 <= trace <= n * dinf / 2,
                 (A.entries, B.entries, d1))
    return _passed(samples, "pairs")


def check_glue(rng, samples):
    for _ in range(samples):
        n = rng.randint(1, 5)
        A, B = random_premetric(rng, n, 6), random_premetric(rng, n, 6)
        delta = metric.sup_distance(A, B) + Fraction(rng.randint(0, 3), 6)
        C = metric.glue_premetric(A, B, delta)
        _require(C.restrict(range(n)) == A and C.restrict(range(n, 2 * n)) == B, (A, B, delta))
        _require(metric.coupling_trace(C) <= n * delta / 2, (A, B, delta))
    return _passed(samples, "gluings")


def check_net(rng, samples):
    nets = {(n, e): set(metric.epsilon_net(n, e)) for n in (2, 3) for e in (Fraction(1, 2), Fraction(1, 3))}
    for _ in range(samples):
        (n, eps), net = rng.choice(sorted(nets.items(), key=lambda kv: kv[0]))
        A = random_premetric(rng, n, rng.randint(1, 12))
        R = metric.round_to_grid(A, eps)
        _require(R in net and metric.sup_distance(A, R) <= eps, (A.entries, eps))
    return _passed(samples, "matrices")


def _geodesic_points(rng, X, count):
    pts = []
    for _ in range(count):
        x, y = rng.randrange(X.n), rng.randrange(X.n)
        dxy = X.d(x, y)
        t = dxy * Fraction(rng.randint(0, 6), 6)
        pts.append(metric.geodesic_point(X, x, y, t))
    return pts


def check_geodesic(rng, samples):
    for _ in range(samples):
        X = random_space(rng, rng.randint(1, 5), 3)
        pts = _geodesic_points(rng, X, 6) + [metric.original(i) for i in range(X.n)]
        dist = metric.geodesic_distance
        for p, q, r in itertools.product(pts, repeat=3):
            _require(dist(X, p, r) <= dist(X, p, q) + dist(X, q, r), (X.matrix.entries, p, q, r))
        for p, q in itertools.product(pts, repeat=2):
            _require(dist(X, p, q) == dist(X, q, p) and (dist(X, p, q) == 0) == (p == q), (p, q))
        for i, j in itertools.product(range(X.n), repeat=2):
            _require(dist(X, metric.original(i), metric.original(j)) == X.d(i, j), (i, j))
    return _passed(samples, "spaces")


def holder_chain_displacement(maps, x, y):
    """Exact ``|F(x) - F(y)|`` for the composite of ``maps`` (applied last to first)."""
    fx, fy = tower_element(x), tower_element(y)
    for kind in reversed(maps):
        if kind == "double":
            fx, fy = fx * 2, fy * 2
        else:
            fx, fy = fx.sqrt(), fy.sqrt()
    return abs(fx - fy)


HOLDER_CONSTANTS = {"double": (2, 1), "sqrt": (1, Fraction(1, 2))}


def check_holder(rng, samples):
    for _ in range(samples):
        maps = [rng.choice(("double", "sqrt")) for _ in range(rng.randint(1, 4))]
        x, y = sorted(Fraction(rng.randint(0, 40), rng.randint(1, 8)) for _ in range(2))
        bound = metric.holder_composition_bound([HOLDER_CONSTANTS[m] for m in maps], y - x)
        disp = holder_chain_displacement(maps, x, y)
        _require(disp <= bound.bound, (maps, x, y, bound))
    return _passed(samples, "composites")


def check_orbit_bound(rng, samples):
    corpus = [G for G in groups.group_corpus(24) if G.order > 1]
    for _ in range(samples):
        G = rng.choice(corpus)
        gens = rng.sample(list(G.elements), min(G.order, rng.randint(1, 3)))
        try:
            D = groups.word_distances(G, gens)
        except groups.GroupError:
            continue
        for perms in (groups.right_multiplication(G), tuple(G.table[g] for g in G.elements)):
            b = groups.lipschitz_orbit_bound(G, perms, D, G.identity)
            _require(b.holds, (G.name, gens, b))
    return _passed(samples, "actions")


# --- urysohn ----------------------------------------------------------------------------


def check_katetov(rng, samples):
    for _ in range(samples):
        X = random_space(rng, rng.randint(1, 4), 2)
        for k in urysohn.katetov_extensions(X, 2, positive=True):
            _require(urysohn.is_katetov(X, k.values), (X.matrix.entries, k))
            Y = urysohn.extend_space(X, [list(k.values)])
            _require(Y.matrix.restrict(range(X.n)) == X.matrix, k)
    return _passed(samples, "spaces")


def _random_image(xbar, X, rng):
    """Partial isometry sending ``xbar`` to a random isometric tuple of ``X``."""
    cands = [t for t in itertools.permutations(range(X.n), len(xbar)) if urysohn.tuples_isometric(X, xbar, t)]
    return urysohn.PartialIsometry.from_tuples(xbar, rng.choice(cands))


def check_amalgam(rng, samples):
    for _ in range(samples):
        X = random_space(rng, rng.randint(1, 6), 4)
        xbar = tuple(rng.sample(range(X.n), rng.randint(1, min(2, X.n))))
        zbar = _random_image(xbar, X, rng).apply(xbar)
        Y, ybar = urysohn.add_uniform_copy(X, xbar)
        am = urysohn.amalgamate_over(Y, xbar, zbar, ybar)
        Z = am.space
        _require(Z.matrix.restrict(range(Y.n)) == Y.matrix, (X.matrix.entries, xbar, zbar))
        _require(urysohn.tuples_isometric(Z, ybar + xbar + zbar, ybar + am.xbar_copy + am.zbar_copy),
                 (X.matrix.entries, xbar, zbar))
        _require(urysohn.uniformly_one(Z, xbar, am.xbar_copy) and urysohn.uniformly_one(Z, xbar, am.zbar_copy),
                 (X.matrix.entries, xbar, zbar))
    return _passed(samples, "amalgams")


def check_factor4(rng, samples):
    for _ in range(samples):
        X = random_space(rng, rng.randint(1, 8), 4)
        xbar = tuple(rng.sample(range(X.n), rng.randint(1, min(3, X.n))))
        g = _random_image(xbar, X, rng)
        ff = urysohn.four_factor_decomposition(X, xbar, g)
        _require(ff.certificate.ok and ff.space.n <= X.n + 3 * len(xbar), (X.matrix.entries, xbar, g))
    return _passed(samples, "decompositions")


def check_extend(rng, samples):
    for _ in range(samples):
        X = random_space(rng, rng.randint(1, 4), 3)
        p = random_partial_isometry(rng, X, X.n)
        try:
            ext = urysohn.extend_partial_isometry(X, p, 6, 40)
        except urysohn.BudgetExhausted as exc:
            return Outcome("budget", f"{X.matrix.entries} {p.pairs}: {exc}")
        _require(ext.isometry.is_isometry_of(ext.space), (X, p))
    return _passed(samples, "partial isometries")


def check_width(rng, samples):
    corpus = [G for G in groups.group_corpus(12)]
    for _ in range(samples):
        G = rng.choice(corpus)
        act = random_isometric_action(rng, G, 3)
        xbar = (rng.randrange(act.space.n),)
        eps = Fraction(rng.randint(1, 4), 3)
        try:
            wd = urysohn.width_decomposition(act, xbar, eps)
        except urysohn.DensityFailure as exc:
            raise _Fail(f"{G.name} {xbar} {eps}: {exc}")
        for f, (u1, u2, h, u3) in wd.factors.items():
            _require(G.product(u1, G.inv(u2), h, G.inv(u3)) == f and {u1, u2, u3} <= wd.U, (G.name, f))
    return _passed(samples, "actions")


# --- trees -------------------------------------------------------------------------------


def _random_pair(rng):
    kind = rng.choice(("finite", "word", "line"))
    if kind == "finite":
        T = trees.random_symmetric_tree(rng, 64)
        return trees.random_automorphism(T, rng), trees.random_automorphism(T, rng)
    if kind == "word":
        return trees.random_word(rng, 8), trees.random_word(rng, 8)
    return trees.random_line_map(rng), trees.random_line_map(rng)


def _identity_check(fn, rng, samples):
    applicable = 0
    for _ in range(samples):
        g, h = _random_pair(rng)
        try:
            res = fn(g, h)
        except trees.Inapplicable:
            continue
        applicable += 1
        _require(res.holds, (str(g), str(h), res))
    return _passed(applicable)


def check_cm1(rng, samples):
    return _identity_check(trees.cm_disjoint_identity, rng, samples)


def check_cm2(rng, samples):
    return _identity_check(trees.cm_max_identity, rng, samples)


def check_serre(rng, samples):
    return _identity_check(trees.serre_check, rng, samples)


def check_conjugation(rng, samples):
    for _ in range(samples):
        g, h = _random_pair(rng)
        _require(trees.translation_length(h * g * h.inverse()) == trees.translation_length(g), (str(g), str(h)))
    return _passed(samples)


def check_macpherson(rng, samples):
    applicable = 0
    for _ in range(samples):
        T = trees.random_symmetric_tree(rng, 64)
        ks = [trees.random_automorphism(T, rng) for _ in range(3)]
        try:
            x = trees.macpherson_fixed_point(T, *ks)
        except trees.PreconditionError:
            continue
        applicable += 1
        k0, k1, k2 = ks
        _require((k0 * k1 * k0 * k2)(x) == x, (T, ks))
    return _passed(applicable)


# --- unitary -------------------------------------------------------------------------------


def check_gs(rng, samples):
    for _ in range(samples):
        dim = rng.randint(1, 5)
        vecs = [random_rational_vector(rng, dim) for _ in range(rng.randint(1, 4))]
        out = unitary.gram_schmidt(vecs)
        _require(unitary.is_orthonormal(out), vecs)
        _require(all(unitary.in_span(v, out) for v in vecs), vecs)
    return _passed(samples, "families")


def check_unitary_extend(rng, samples):
    for _ in range(samples):
        size = rng.randint(1, 4)
        T = random_orthogonal(rng, size)
        srcs = [random_rational_vector(rng, size) for _ in range(rng.randint(1, size))]
        tgts = [T.apply(v) for v in srcs]
        R = unitary.extend_partial_isometry(srcs, tgts)
        _require(R.is_orthogonal() and all(R.apply(s) == t for s, t in zip(srcs, tgts)), T)
    return _passed(samples, "partial isometries")


def check_paste(rng, samples):
    for _ in range(samples):
        blocks = [random_orthogonal(rng, rng.randint(1, 3), offset=0) for _ in range(rng.randint(1, 3))]
        P = unitary.block_paste(blocks)
        _require(P.is_orthogonal(), blocks)
        pos = 1
        for b in blocks:
            for i in range(b.size):
                for j in range(b.size):
                    _require(P.entry(pos + i, pos + j) == b.block[i][j], blocks)
            pos += b.size
    return _passed(samples, "pastings")


def check_shiftwin(rng, samples):
    for _ in range(samples):
        k = rng.randint(0, 1)
        enum = unitary.block_tuple_enumeration(rng.randint(1, 2), 2 * k + 1)
        rng.shuffle(enum)
        fam = unitary.AmpleFamily.build(unitary.ample_schedule(enum[:6], 6))
        target = rng.choice(enum[:6])
        targets = [unitary.FinitaryOperator(b.block, -k) for b in target]
        n = unitary.shift_conjugate_window(fam, targets, k)
        _require(unitary.verify_shift_window(fam, targets, k, n), (k, n))
    return _passed(samples, "windows")


def check_bergman(rng, samples):
    for _ in range(samples):
        k = rng.randint(1, 2)
        T = random_orthogonal(rng, rng.randint(1, 2 * k + 2), offset=rng.randint(1, 2), reflections=1)
        bf = unitary.bergman_factorization(T, k)
        _require(bf.ok, T)
    return _passed(samples, "operators")


def check_density(rng, samples):
    for _ in range(samples):
        dim = rng.randint(1, 3)
        T = random_orthogonal(rng, dim)
        xs = unitary.gram_schmidt([random_rational_vector(rng, dim) for _ in range(dim)])
        pairs = [(x, T.apply(x)) for x in xs]
        approx = unitary.approximate_on_finite_set(pairs, 0)
        _require(all(e == 0 for e in approx.errors2), T)
    return _passed(samples, "targets")


# --- group metrics ---------------------------------------------------------------------------


def _corpus(max_order):
    return groups.group_corpus(max_order)


def check_chain(rng, samples):
    corpus = _corpus(12)
    for _ in range(samples):
        G = rng.choice(corpus)
        elems = list(G.elements)
        rng.shuffle(elems)
        cuts = sorted(rng.sample(range(1, G.order + 1), min(G.order, 3)))
        chain = groups.normalize_chain(G, [elems[:c] for c in cuts] + [elems])
        a, b, c = (rng.randrange(G.order) for _ in range(3))
        da = groups.chain_metric(G, chain, a, b)
        _require(da == groups.chain_metric(G, chain, G.mul(c, a), G.mul(c, b)), (G.name, a, b, c))
        _require(da == groups.chain_metric_bruteforce(G, chain, a, b), (G.name, a, b))
    return _passed(samples, "chains")


def check_birkhoff(rng, samples):
    corpus = _corpus(24)
    for _ in range(samples):
        G = rng.choice(corpus)
        filt = groups.random_filtration(G, rng)
        groups.check_filtration(G, filt)
        delta, d = groups.birkhoff_tables(G, filt)
        for a in G.elements:
            for b in G.elements:
                _require(delta[a][b] <= 2 * d[a][b] <= 2 * delta[a][b], (G.name, filt, a, b))
    return _passed(samples, "filtrations")


def check_cayley_width(rng, samples):
    corpus = _corpus(24)
    for _ in range(samples):
        G = rng.choice(corpus)
        E = {G.identity} | set(rng.sample(list(G.elements), min(G.order, 2)))
        E |= set(G.set_inverse(E))
        try:
            w = groups.cayley_width(G, E)
        except groups.NotGenerating:
            continue
        _require(groups.power_width(G, E) == w, (G.name, sorted(E)))
    return _passed(samples, "generating sets")


def check_square(rng, samples):
    corpus = _corpus(24)
    for _ in range(samples):
        G = rng.choice(corpus)
        B = {G.identity}
        while 2 * len(B) <= G.order:
            a = rng.randrange(G.order)
            B |= {a, G.inv(a)}
        rep = groups.large_subset_square(G, B)
        _require(rep.majority and rep.covers, (G.name, sorted(B)))
    return _passed(samples, "subsets")


def check_induce(rng, samples):
    corpus = [G for G in _corpus(8)]
    done = 0
    for _ in range(samples):
        G = rng.choice(corpus)
        subs = [H for H in groups.subgroups(G) if G.order // len(H) <= 3]
        H = rng.choice(subs)
        Hg, idx = groups.restrict_group(G, H)
        base = random_isometric_action(rng, Hg, 2)
        if base.space.n ** (G.order // len(H)) > 400:
            continue
        T = groups.subgroup_transversal(G, H)
        ind = groups.induce_action(G, H, T, base, idx)
        _require(ind.action.is_isometric(), (G.name, sorted(H)))
        _require(groups.orbit_bound_violation(ind) is None, (G.name, sorted(H)))
        done += 1
    return _passed(done, "inductions")


# --- circular ------------------------------------------------------------------------------


def check_between(rng, samples):
    for _ in range(samples):
        x, y, z, r = (Fraction(rng.randint(0, 23), 24) for _ in range(4))
        _require(circular.betweenness(x, y, z) == circular.betweenness(x + r, y + r, z + r), (x, y, z, r))
    return _passed(samples, "triples")


def check_config(rng, samples):
    for _ in range(samples):
        pts = [Fraction(rng.randint(0, 11), 12) for _ in range(rng.randint(0, 6))]
        _require(circular.is_circular_config(pts) == circular.is_circular_config_bruteforce(pts), pts)
    return _passed(samples, "tuples")


def check_produkt(rng, samples):
    done = 0
    for _ in range(samples):
        xbar, ybar, g = random_produkt_instance(rng, rng.randint(1, 6), rng.randint(1, 6))
        if not circular.is_factorizable(xbar, g):
            try:
                circular.produkt_factorization(xbar, ybar, g)
            except circular.NotFactorizable:
                continue
            raise _Fail(f"factorised a configuration the arc test rejects: {xbar} {ybar} {g}")
        res = circular.produkt_factorization(xbar, ybar, g)
        _require(res.ok, (xbar, ybar, g))
        done += 1
    return _passed(done, "configurations")


SUITES: dict[str, list[CheckSpec]] = {
    "metric": [
        CheckSpec("metric.validate", "pre-metric space D_n", check_validate),
        CheckSpec("metric.d1", "d1 lemma: 2 d1 <= n d_inf <= n d1", check_d1_sandwich),
        CheckSpec("metric.glue", "d1 lemma: gluing construction", check_glue),
        CheckSpec("metric.net", "Theorem urysohn: eps-dense finite subset of D_n", check_net),
        CheckSpec("metric.geodesic", "Theorem basic 5=>1: geodesic extension", check_geodesic),
        CheckSpec("metric.holder", "Hoelder composition bound", check_holder),
        CheckSpec("metric.orbit", "Theorem basic 3=>4: orbit bound 2k^2M^k", check_orbit_bound),
    ],
    "urysohn": [
        CheckSpec("urysohn.katetov", "Katetov one-point extension", check_katetov),
        CheckSpec("urysohn.amalgam", "Theorem urysohn: free amalgam over ybar", check_amalgam),
        CheckSpec("urysohn.factor4", "Theorem urysohn: four-factor decomposition", check_factor4),
        CheckSpec("urysohn.extend", "Solecki extension of partial isometries", check_extend),
        CheckSpec("urysohn.width", "Prop width: U A' U factorisation", check_width),
    ],
    "tree": [
        CheckSpec("tree.conjugation", "translation length is a class function", check_conjugation),
        CheckSpec("tree.cm1", "Lemma cm1: disjoint characteristic subtrees", check_cm1),
        CheckSpec("tree.cm2", "Lemma cm2: meeting axes", check_cm2),
        CheckSpec("tree.serre", "Serre's Lemma", check_serre),
        CheckSpec("tree.macpherson", "Theorem macpherson: common fixed vertex", check_macpherson),
    ],
    "unitary": [
        CheckSpec("unitary.gs", "Lemma gram", check_gs),
        CheckSpec("unitary.extend", "Lemma hrushovski: finitary extension", check_unitary_extend),
        CheckSpec("unitary.paste", "Prop ample: block pasting", check_paste),
        CheckSpec("unitary.shiftwin", "Prop cyclic: shift-conjugate window", check_shiftwin),
        CheckSpec("unitary.bergman", "Prop Bergman: U^-1 M U^-1 M^-1 U", check_bergman),
        CheckSpec("unitary.density", "density of finitary operators", check_density),
    ],
    "group": [
        CheckSpec("group.chain", "Theorem basic 2=>3: chain metric", check_chain),
        CheckSpec("group.birkhoff", "Lemma birkhoff: delta <= 2d <= 2delta", check_birkhoff),
        CheckSpec("group.width", "Cayley width", check_cayley_width),
        CheckSpec("group.square", "large symmetric subsets square to G", check_square),
        CheckSpec("group.induce", "finite index induced action", check_induce),
    ],
    "circular": [
        CheckSpec("circular.between", "betweenness relation B", check_between),
        CheckSpec("circular.config", "circular configurations", check_config),
        CheckSpec("circular.produkt", "Lemma produkt", check_produkt),
    ],
}

def run_check(spec: CheckSpec, seed: int, samples: int) -> CheckResult:
    rng = random.Random(f"{seed}:{spec.name}")
    start = time.perf_counter_ns()
    try:
        out = spec.run(rng, samples)
    except _Fail as exc:
        out = Outcome("fail", str(exc))
    except urysohn.BudgetExhausted as exc:
        out = Outcome("budget", str(exc))
    except Exception as exc:  # a crash is a failed check, with the error as witness
        out = Outcome("fail", f"{type(exc).__name__}: {exc}")
    micros = (time.perf_counter_ns() - start) // 1000
    return CheckResult(spec.name, spec.lemma, out.status, out.witness, micros)


def suite_specs(name: str) -> list[CheckSpec]:
    if name == "all":
        return [s for specs in SUITES.values() for s in specs]
    if name not in SUITES:
        raise KeyError(name)
    return list(SUITES[name])
