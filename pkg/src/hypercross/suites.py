"""Deterministic property suites, one per acceptance criterion.

Each suite takes a seed and returns a SuiteResult whose ``metrics`` hold
only strings, integers and booleans, so reports serialize byte-identically.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from hypercross.annulus import cylinder_system
from hypercross.crossratio import fit_tree, hyperbolicity_constant, table_from_tree
from hypercross.errors import HypercrossError
from hypercross.finite_sharp import affine_group, dickson_near_field, pgl2_fq_action, verify_sharp_transitive
from hypercross.metric_tree import path_gap, random_tree, tree_crossratio
from hypercross.padic_projective import (
    MobiusAutomorphism,
    ProjPoint,
    random_loxodromic,
    random_point,
    rational_end_word,
    solve_sharply3,
)
from hypercross.quasimetric import QuasimetricSpace, crossratio_from_qm, triple_rho
from hypercross.rational import fmt
from hypercross.tree_boundary.automorphism import AxisShift, classify_automorphism
from hypercross.tree_boundary.dynamics import (
    AtomSpace,
    conical_witness,
    eventually_monotone,
    gerasimov_limit,
    interpolated_ray,
    ray_triple_geodesic,
)
from hypercross.tree_boundary.rays import (
    BoundaryPoint,
    RegularTreeModel,
    boundary_crossratio,
    random_ray,
    ray_median,
    vertex_distance,
)

DEFAULT_SEED = 7


@dataclass
class SuiteResult:
    criterion: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self, timings=False):
        out = {"criterion": self.criterion, "suite": self.name, "passed": self.passed, **self.metrics}
        if timings:
            out["seconds"] = f"{self.seconds:.3f}"
        return out

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion:2d} {self.name}"


def tree_corpus(seed, count=200, max_leaves=10):
    rng = random.Random(seed)
    return [random_tree(rng, rng.randint(4, max_leaves)) for _ in range(count)]


def _pairings(q):
    a, b, c, d = q
    return ((a, b, c, d), (a, c, b, d), (a, d, b, c))


def tree_zero_hyperbolic(seed=DEFAULT_SEED, count=200):
    t0 = time.perf_counter()
    ok = 0
    worst = Fraction(0)
    for t in tree_corpus(seed, count):
        k = hyperbolicity_constant(table_from_tree(t)).k
        worst = max(worst, k)
        ok += k == 0
    secs = time.perf_counter() - t0
    return SuiteResult(1, "tree-zero-hyperbolic", ok == count and secs < 30,
                       {"trees": count, "zero_k": ok, "max_k": fmt(worst), "under_30s": secs < 30}, secs)


def path_realization(seed=DEFAULT_SEED, count=200):
    checked = mismatches = 0
    for t in tree_corpus(seed, count):
        for q in combinations(t.leaves, 4):
            for x, y, z, w in _pairings(q):
                checked += 1
                mismatches += tree_crossratio(t, x, y, z, w) != path_gap(t, x, y, z, w)
    return SuiteResult(2, "path-realization", mismatches == 0, {"checked": checked, "mismatches": mismatches})


def qm_consistency(seed=DEFAULT_SEED, count=200):
    checked = mismatches = 0
    for t in tree_corpus(seed, count):
        q = QuasimetricSpace(t.leaves, lambda u, v: t.distance(u, v), defect=0)
        tbl = crossratio_from_qm(q)
        for quad in combinations(t.leaves, 4):
            for x, y, z, w in _pairings(quad):
                checked += 1
                mismatches += tbl(x, y, z, w) != tree_crossratio(t, x, y, z, w)
    return SuiteResult(3, "qm-consistency", mismatches == 0, {"checked": checked, "mismatches": mismatches})


def _distinct(rays):
    return len({r.prefix for r in rays}) == len(rays)


def rho_median_samples(seed, count=100, depth=8):
    rng = random.Random(seed)
    model = RegularTreeModel(3, 2, depth)
    out = []
    while len(out) < count:
        X = tuple(random_ray(rng, model, depth) for _ in range(3))
        Y = tuple(random_ray(rng, model, depth) for _ in range(3))
        if _distinct(X) and _distinct(Y):
            out.append((X, Y))
    return model, out


def dual_violations(cr, points):
    bad = 0
    for q in combinations(points, 4):
        vals = [cr(*p) for p in _pairings(q)]
        bad += sum(v > 0 for v in vals) > 1
    return bad


def rho_median(seed=DEFAULT_SEED, count=100, depth=8):
    model, samples = rho_median_samples(seed, count, depth)

    def cr(x, y, z, w):
        return Fraction(boundary_crossratio(model, x, y, z, w, depth))

    worst = Fraction(0)
    for X, Y in samples:
        d = vertex_distance(ray_median(*X, depth=depth), ray_median(*Y, depth=depth))
        worst = max(worst, abs(triple_rho(cr, X, Y) - d))
    return SuiteResult(4, "rho-median", worst == 0, {"pairs": len(samples), "max_deviation": fmt(worst)})


def fit_round_trip(seed=DEFAULT_SEED, count=20):
    rng = random.Random(seed)
    worst = Fraction(0)
    slowest = 0.0
    for _ in range(count):
        t = random_tree(rng, rng.randint(4, 6))
        t0 = time.perf_counter()
        emb = fit_tree(table_from_tree(t))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, emb.deviation)
    return SuiteResult(5, "fit-tree", worst == 0 and slowest < 60,
                       {"tables": count, "max_deviation": fmt(worst), "under_60s_each": slowest < 60})


def annulus_offsets(seed, depth, sample_size=10):
    """(largest |induced - geodesic|, dual violations) on sampled atoms."""
    model = RegularTreeModel.binary(depth)
    sys = cylinder_system(model, depth)
    rng = random.Random(seed)
    sample = rng.sample(model.level(depth), sample_size)
    C = 0
    for q in combinations(sample, 4):
        for x, y, z, w in _pairings(q):
            rays = [BoundaryPoint.truncated(u) for u in (x, y, z, w)]
            C = max(C, abs(sys.crossratio(x, y, z, w) - boundary_crossratio(model, *rays, depth)))
    return C, dual_violations(sys.crossratio, sample)


def annulus_geodesic(seed=DEFAULT_SEED, sample_size=10):
    c6, _ = annulus_offsets(seed, 6, sample_size)
    c8, _ = annulus_offsets(seed, 8, sample_size)
    return SuiteResult(6, "annulus-geodesic", c6 == c8, {"C_depth6": c6, "C_depth8": c8})


def dual_exclusion(seed=DEFAULT_SEED):
    model, samples = rho_median_samples(seed)

    def cr(x, y, z, w):
        return boundary_crossratio(model, x, y, z, w, model.depth)

    v4 = sum(dual_violations(cr, list(X) + [y for y in Y if y not in X]) for X, Y in samples)
    _, v6 = annulus_offsets(seed, 6)
    _, v8 = annulus_offsets(seed, 8)
    total = v4 + v6 + v8
    return SuiteResult(7, "dual-exclusion", total == 0,
                       {"violations_rho_samples": v4, "violations_annulus": v6 + v8})


def finite_sharp(seed=DEFAULT_SEED):
    t0 = time.perf_counter()
    orders = {}
    ok = True
    for q in (2, 3, 4, 5, 7, 8, 9):
        cert = verify_sharp_transitive(pgl2_fq_action(q), 3)
        orders[str(q)] = cert.order
        ok &= cert.sharp and cert.order == (q + 1) * q * (q - 1)
    nf = dickson_near_field(9)
    aff = verify_sharp_transitive(affine_group(nf), 2)
    ok &= aff.sharp and aff.order == 72 and nf.left_distributivity_witness is not None
    secs = time.perf_counter() - t0
    return SuiteResult(8, "finite-sharp", bool(ok) and secs < 60,
                       {"pgl2_orders": orders, "dickson_affine_order": aff.order,
                        "left_distributivity_witness": list(nf.left_distributivity_witness or ())}, secs)


def padic_sharp(seed=DEFAULT_SEED, count=500, precision=8, depth=6, working_precision=24):
    """Sampled points carry ``precision`` digits and are solved as exact
    values at ``working_precision``; ``strict`` counts solves that also
    succeed with no extra digits."""
    rng = random.Random(seed)
    solved = strict = equivariant = 0
    failures = []
    for p in (2, 3):
        for _ in range(count):
            while True:
                pts = [random_point(rng, p, precision) for _ in range(3)]
                if all(not _close(a, b) for a, b in combinations(pts, 2)):
                    break
            try:
                solve_sharply3(*pts)
                strict += 1
            except HypercrossError:
                pass
            try:
                m = solve_sharply3(*pts, working_precision=working_precision)
            except HypercrossError as exc:
                failures.append(f"solve p={p}: {exc}")
                continue
            solved += 1
            g = MobiusAutomorphism(m, RegularTreeModel.bruhat_tits(p, depth))
            z = random_point(rng, p, precision).to_rational()
            x = BoundaryPoint.truncated(rational_end_word(z, p, depth + len(g.image(()))))
            if g.ray_image(x, depth) == rational_end_word(g.point_image(z), p, depth):
                equivariant += 1
            else:
                failures.append(f"equivariance p={p} at {z}")
    total = 2 * count
    return SuiteResult(9, "padic-sharp", solved == total and equivariant == total,
                       {"triples": total, "solved": solved, "solved_without_extra_digits": strict,
                        "equivariant": equivariant, "failures": failures[:5]})


def _close(a: ProjPoint, b: ProjPoint):
    try:
        return a.equals(b)
    except HypercrossError:
        return True


def loxodromic_dynamics(seed=DEFAULT_SEED, count=50, depth=6, max_power=80):
    rng = random.Random(seed)
    monotone = agree = 0
    for _ in range(count):
        g = random_loxodromic(rng, 2, depth=depth)
        cls = classify_automorphism(g)
        space = AtomSpace(g.model, depth)
        ia, ic = space.atom_of(cls.repelling), space.atom_of(cls.attracting)
        seq, levels = [], []
        for i in range(1, max_power + 1):
            gi = g.power(i)
            seq.append(gi)
            levels.append(space.hausdorff_level(gi, [ia], [ic]))
            if levels[-3:] == [depth] * 3:
                break
        trace = [space.distance(h) for h in levels]
        monotone += eventually_monotone(trace) < len(trace) and levels[-1] == depth
        lim = gerasimov_limit(seq, 3, depth)
        agree += (len(lim.P) == len(lim.Q) == 1 and lim.P[0].prefix == cls.repelling.prefix
                  and lim.Q[0].prefix == cls.attracting.prefix)
    return SuiteResult(10, "loxodromic-dynamics", monotone == count and agree == count,
                       {"elements": count, "monotone_to_floor": monotone, "gerasimov_agrees": agree})


def interpolation(seed=DEFAULT_SEED, count=5, length=10):
    rng = random.Random(seed)
    model = RegularTreeModel(3, 2, 8)
    worst_cr = worst_rho = worst_centre = Fraction(0)
    for _ in range(count):
        while True:
            a, b, c = (random_ray(rng, model, 4, periodic=True) for _ in range(3))
            if len({a, b, c}) == 3:
                break
        xs = interpolated_ray(a, b, c, length, model)
        depth = 4 + 2 * length + 8
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                v = boundary_crossratio(model, b, xs[i], a, xs[j], depth)
                worst_cr = max(worst_cr, abs(v - (j - i)))
        tg = ray_triple_geodesic(a, b, length, model, centre=(a, b, c))
        worst_rho = max(worst_rho, tg.max_deviation)
        worst_centre = max(worst_centre, tg.centre_deviation)
    ok = worst_cr == worst_rho == worst_centre == 0
    return SuiteResult(11, "interpolation", ok,
                       {"windows": count, "max_path_deviation": fmt(worst_cr),
                        "max_rho_deviation": fmt(worst_rho), "max_centre_deviation": fmt(worst_centre)})


def conical(seed=DEFAULT_SEED, count=20, depth=6):
    rng = random.Random(seed)
    model = RegularTreeModel(3, 2, depth)
    g = AxisShift(model, 1)
    ok = 0
    failures = []
    for _ in range(count):
        x = random_ray(rng, model, depth, periodic=True)
        try:
            conical_witness(x, g, depth)
            ok += 1
        except HypercrossError as exc:
            failures.append(f"{x}: {exc}")
    return SuiteResult(12, "conical", ok == count, {"points": count, "witnessed": ok, "failures": failures[:5]})


SUITES = {
    "tree-zero-hyperbolic": tree_zero_hyperbolic,
    "path-realization": path_realization,
    "qm-consistency": qm_consistency,
    "rho-median": rho_median,
    "fit-tree": fit_round_trip,
    "annulus-geodesic": annulus_geodesic,
    "dual-exclusion": dual_exclusion,
    "finite-sharp": finite_sharp,
    "padic-sharp": padic_sharp,
    "loxodromic-dynamics": loxodromic_dynamics,
    "interpolation": interpolation,
    "conical": conical,
}


def run_suite(name, seed=DEFAULT_SEED):
    """Run one suite, or all of them for ``name == "all"``; returns a list."""
    if not name:
        raise KeyError("empty suite name")
    if name == "all":
        return [run_suite(n, seed)[0] for n in SUITES]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    t0 = time.perf_counter()
    res = SUITES[name](seed)
    res.seconds = res.seconds or time.perf_counter() - t0
    return [res]
