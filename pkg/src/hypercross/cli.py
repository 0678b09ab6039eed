"""Command-line driver.

Every command writes JSON lines (keys sorted) and ends with one summary
object ``{"summary": {...}}``; the exit status is 0 exactly when every
check in the run passed.  ``--emit-dot`` switches the commands that have a
graph form to Graphviz output.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys
from fractions import Fraction
from itertools import combinations

from hypercross import annulus as ann
from hypercross import crossratio as cr
from hypercross import finite_sharp as fs
from hypercross import metric_tree as mt
from hypercross import padic_projective as pp
from hypercross import quasimetric as qm
from hypercross import suites
from hypercross.errors import HypercrossError
from hypercross.rational import INF, as_rational, fmt, parse
from hypercross.tree_boundary import automorphism as aut
from hypercross.tree_boundary import dynamics as dyn
from hypercross.tree_boundary import rays

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Malformed input file or argument; the message locates the problem."""


class Report:
    def __init__(self, command, out):
        self.command = command
        self.out = out
        self.records = 0
        self.ok = True
        self.dot = None

    def emit(self, obj):
        self.out.write(json.dumps(_plain(obj), sort_keys=True) + "\n")
        self.records += 1

    def check(self, passed):
        self.ok = self.ok and bool(passed)
        return bool(passed)

    def finish(self):
        if self.dot is not None:
            self.out.write(self.dot)
            return
        self.emit({"summary": {"command": self.command, "ok": self.ok, "records": self.records}})


def _plain(obj):
    """JSON-safe copy: Fractions and infinities become strings, tuples lists."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_plain(v) for v in obj]
        return sorted(items, key=json.dumps) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction) or obj == INF:
        return fmt(obj)
    if isinstance(obj, rays.BoundaryPoint):
        return ray_text(obj)
    if hasattr(obj, "item"):  # numpy scalar
        return _plain(obj.item())
    if isinstance(obj, float):
        raise TypeError(f"float {obj!r} would cross the CLI boundary")
    return str(obj)


# input parsing


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _from(path, build):
    data = load_json(path)
    try:
        return build(data)
    except KeyError as exc:
        raise InputError(f"{path}: missing field {exc}") from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, HypercrossError):
            raise
        raise InputError(f"{path}: {exc}") from None


def load_tree(path):
    if path.endswith(".dot") or path.endswith(".gv"):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from None
        try:
            return mt.MetricTree.from_dot(text)
        except (HypercrossError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{path}: {exc}") from None
    if path in ("h-tree", "star"):
        return mt.h_tree() if path == "h-tree" else mt.star_tree()
    return _from(path, mt.MetricTree.from_json)


_RAY = re.compile(r"^([^()]*)(?:\(([^()]+)\))?$")


def _letters(text):
    text = text.strip()
    if not text:
        return ()
    parts = text.split(",") if "," in text else list(text)
    try:
        return tuple(int(a) for a in parts)
    except ValueError:
        raise InputError(f"bad letter in {text!r}") from None


def parse_ray(text):
    """``"012"`` is a word known to depth 3, ``"01(2)"`` the periodic ray
    01222...  Letters are digits, or comma separated for wide trees."""
    m = _RAY.match(text.strip())
    if not m:
        raise InputError(f"cannot read ray {text!r}")
    return rays.BoundaryPoint(_letters(m.group(1)), _letters(m.group(2) or ""))


def ray_text(x):
    sep = "," if any(a > 9 for a in x.prefix + x.period) else ""
    body = sep.join(map(str, x.prefix))
    return body + (f"({sep.join(map(str, x.period))})" if x.period else "")


def parse_word(text):
    x = parse_ray(text)
    if x.period:
        raise InputError(f"expected a finite word, got {text!r}")
    return x.prefix


def parse_q(text):
    try:
        return parse(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational: {text!r}") from None


def word_text(w):
    return "".join(map(str, w)) if all(a < 10 for a in w) else ",".join(map(str, w))


def save(args, data):
    """Also write ``data`` as a plain JSON file when --save is given, so it
    can be fed back through --in."""
    if args.save:
        with open(args.save, "w") as fh:
            json.dump(_plain(data), fh, sort_keys=True)
            fh.write("\n")
    return data


def _model(args):
    if args.binary:
        return rays.RegularTreeModel.binary(args.depth)
    return rays.RegularTreeModel.regular(args.degree, args.depth)


# tree


def cmd_tree(args, rep):
    if args.action == "random":
        t = mt.random_tree(random.Random(args.seed), args.leaves, binary=args.binary)
    else:
        t = load_tree(args.input)
    if args.action in ("random", "show"):
        if args.emit_dot:
            rep.dot = t.to_dot()
            return
        rep.emit({"tree": t.to_json(), "leaves": [str(x) for x in t.leaves]})
        return
    pts = args.points
    need = {"distance": 2, "median": 3, "crossratio": 4, "point": 3}
    if args.action in need and len(pts) != need[args.action]:
        raise InputError(f"tree {args.action} takes {need[args.action]} points")
    if args.action == "distance":
        rep.emit({"distance": mt.tree_distance(t, *pts), "path": t.path(*pts)})
    elif args.action == "median":
        rep.emit({"median": mt.tree_median(t, *pts)})
    elif args.action == "crossratio":
        rep.emit({"crossratio": mt.tree_crossratio(t, *pts), "path_gap": mt.path_gap(t, *pts)})
    elif args.action == "point":
        u, v, s = pts
        try:
            p = t.point_at(u, v, parse_q(s))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        rep.emit({"point": vars(p) if isinstance(p, mt.EdgePoint) else p})
    elif args.action == "table":
        rep.emit(save(args, cr.table_from_tree(t).to_json()))


# crossratio


def cmd_crossratio(args, rep):
    tbl = _from(args.input, cr.CrossratioTable.from_json)
    if args.action == "check":
        cert = cr.hyperbolicity_constant(tbl, args.bound)
        rep.emit(cert.to_json())
        rep.check(cert.violation is None)
    elif args.action == "path":
        ok, wit = cr.check_path_property(tbl, args.p)
        for quad, chain in wit.items():
            rep.emit({"tuple": quad, "chain": chain})
        rep.emit({"path_property": ok, "p": args.p})
        rep.check(ok)
    elif args.action == "qu":
        a, b = _points(tbl, args.a, args.b)
        pts, m = cr.quasi_ultrametric_matrix(tbl, a, b, args.lam)
        for x, y in combinations(pts, 2):
            e = tbl.get(a, b, x, y)
            v = m[x][y]
            rep.emit({"x": x, "y": y, "exponent": e, "value": v if isinstance(v, Fraction) else None})
    elif args.action == "ball":
        a, b, x = _points(tbl, args.a, args.b, args.x)
        rep.emit({"ball": sorted(map(str, cr.cr_ball(tbl, a, b, x, args.r)))})
    elif args.action == "fit":
        emb = cr.fit_tree(tbl, args.max_points)
        if args.emit_dot:
            rep.dot = emb.tree.to_dot("fit")
        else:
            rep.emit(emb.to_json())
        rep.check(emb.deviation == 0 or not args.require_exact)


def _points(tbl, *names):
    lookup = {str(g): g for g in tbl.ground}
    out = []
    for n in names:
        if n not in lookup:
            raise InputError(f"point {n!r} is not in the ground set")
        out.append(lookup[n])
    return out


# quasimetric


def cmd_qm(args, rep):
    if args.action == "triples":
        tbl = _from(args.input, cr.CrossratioTable.from_json)
        triples = list(combinations(tbl.ground, 3))
        for i, X in enumerate(triples):
            for Y in triples[i + 1:]:
                v = 0 if set(X) == set(Y) else qm.triple_rho(tbl, X, Y)
                rep.emit({"X": list(map(str, X)), "Y": list(map(str, Y)), "rho": v})
        if args.defect:
            rep.emit({"defect": qm.rho_on_triples(tbl).defect})
        return
    space = _from(args.input, qm.QuasimetricSpace.from_json)
    if args.action == "defect":
        rep.emit({"points": len(space.points), "defect": space.defect})
        if args.bound is not None:
            rep.check(space.defect <= as_rational(args.bound))
    elif args.action == "crossratio":
        rep.emit(save(args, qm.crossratio_from_qm(space).to_json()))
    elif args.action == "geodesic":
        seg = qm.find_geodesic_segment(space, args.k, args.x, args.y)
        rep.emit({"segment": None if seg is None else seg.points, "k": args.k})
        rep.check(seg is not None)


# annulus


def _system(args):
    if args.input:
        return _from(args.input, ann.AnnulusSystem.from_json)
    model = rays.RegularTreeModel.binary(args.depth)
    return ann.cylinder_system(model, args.depth)


def _sample(args, universe):
    universe = list(universe)
    if args.sample_size >= len(universe):
        return universe
    return random.Random(args.seed).sample(universe, args.sample_size)


def cmd_annulus(args, rep):
    if args.action == "cylinder":
        levels = None if not args.levels else [int(k) for k in args.levels.split(",")]
        sys_ = ann.cylinder_system(rays.RegularTreeModel.binary(args.depth), args.depth, levels)
        rep.emit(save(args, sys_.to_json()))
        return
    if args.action == "compare":
        C, bad = suites.annulus_offsets(args.seed, args.depth, args.sample_size)
        rep.emit({"depth": args.depth, "C": C, "dual_violations": bad})
        rep.check(bad == 0)
        return
    if args.action == "refine":
        _refine(args, rep)
        return
    sys_ = _system(args)
    if args.action == "axioms":
        sys_.check_partial_order()
        res = ann.check_axioms(sys_, _sample(args, sys_.universe), args.a3_threshold)
        rep.emit({**res, "a4_failures": [[word_text(x), word_text(y)] for x, y in res["a4_failures"]]})
        rep.check(res["a1"] and res["a3"] and res["a4"])
    elif args.action == "count":
        K = [parse_word(w) for w in args.K.split(";")]
        L = [parse_word(w) for w in args.L.split(";")]
        rep.emit({"count": ann.separation_count(K, L, sys_)})
    elif args.action == "crossratio":
        if len(args.atoms) != 4:
            raise InputError("annulus crossratio takes 4 atoms")
        x, y, z, w = (parse_word(a) for a in args.atoms)
        rep.emit({"crossratio": sys_.crossratio(x, y, z, w), "chain": sys_.longest_chain()})


def _refine(args, rep):
    """Run the inductive refinement n = 0..steps on binary depth-D atoms."""
    model = rays.RegularTreeModel.binary(args.depth)
    metric = rays.VisualMetric(args.depth, args.base)
    sys_ = ann.AnnulusSystem(model.level(args.depth), [])
    swap = aut.child_swap(model)
    group = [lambda u: u, lambda u: swap.image(u)]
    for n in range(args.steps + 1):
        try:
            sys_ = ann.refine_system_step(sys_, n, metric, group, atom_diameter=metric.atom_diameter)
        except HypercrossError as exc:
            rep.emit({"n": n, "error": str(exc)})
            rep.check(False)
            return
        rep.emit({"n": n, "annuli": len(sys_), "two_zero_violations": 0})


# boundary


def cmd_boundary(args, rep):
    model = _model(args)
    if args.action in ("classify", "dynamics", "conical"):
        g = aut.AxisShift(model, args.shift)
    pts = [parse_ray(r) for r in args.rays]
    need = {"crossratio": 4, "median": 3, "interpolate": 3, "conical": 1, "classify": 0, "dynamics": 0}
    if args.action in need and len(pts) != need[args.action]:
        raise InputError(f"boundary {args.action} takes {need[args.action]} rays")
    if args.action == "crossratio":
        rep.emit({"crossratio": rays.boundary_crossratio(model, *pts, args.depth)})
    elif args.action == "median":
        rep.emit({"median": word_text(rays.ray_median(*pts, args.depth))})
    elif args.action == "subtree":
        tree, mapping, dev = rays.approximating_subtree(model, pts, args.depth)
        if args.emit_dot:
            rep.dot = tree.to_dot("subtree")
        else:
            rep.emit({"tree": tree.to_json(), "mapping": mapping, "deviation": dev})
    elif args.action == "classify":
        cls = aut.classify_automorphism(g)
        if args.emit_dot:
            rep.dot = axis_dot(model, cls, min(args.depth, 4))
        else:
            rep.emit(cls.to_json())
    elif args.action == "dynamics":
        space = dyn.AtomSpace(model, args.depth, args.base)
        cls = aut.classify_automorphism(g)
        seq = [g.power(i) for i in range(1, args.max_power + 1)]
        ia, ic = space.atom_of(cls.repelling), space.atom_of(cls.attracting)
        trace = [space.distance(space.hausdorff_level(h, [ia], [ic])) for h in seq]
        for i, h in enumerate(trace, 1):
            rep.emit({"i": i, "hausdorff": h})
        lim = dyn.gerasimov_limit(seq, args.budget, args.depth, args.base)
        rep.emit({"gerasimov": lim.to_json(), "monotone_from": dyn.eventually_monotone(trace)})
    elif args.action == "conical":
        w = dyn.conical_witness(pts[0], g, args.depth)
        rep.emit(w.to_json())
    elif args.action == "interpolate":
        a, b, c = pts
        xs = dyn.interpolated_ray(a, b, c, args.length, model)
        tg = dyn.ray_triple_geodesic(a, b, args.length, model, centre=(a, b, c))
        rep.emit({"rays": xs, "max_deviation": tg.max_deviation,
                  "centre_deviation": tg.centre_deviation})
        rep.check(tg.max_deviation == 0 and tg.centre_deviation == 0)


def axis_dot(model, cls, radius):
    """Ball of the given radius with the axis (or fixed set) in red."""
    mark = set()
    if cls.kind == "loxodromic":
        u, v = cls.repelling.word(radius), cls.attracting.word(radius)
        path = [rays.vertex_toward(u, v, t) for t in range(rays.vertex_distance(u, v) + 1)]
        mark = {frozenset((p, q)) for p, q in zip(path, path[1:])}
    elif cls.kind == "inversion":
        mark = {frozenset(cls.fixed)}
    lines = ["graph ball {"]
    for v in model.ball(radius):
        if v:
            attr = ' [color="red"]' if frozenset((v[:-1], v)) in mark else ""
            lines.append(f'  "{rays.vertex_name(v[:-1])}" -- "{rays.vertex_name(v)}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


# p-adic


def _ppoint(text, args):
    q = parse_q(text)
    return pp.ProjPoint.from_rational(None if q == INF else q, args.prime, args.precision)


def cmd_padic(args, rep):
    p, prec = args.prime, args.precision
    vals = args.values
    need = {"point": 1, "solve": 3, "crossratio": 4, "act": 5, "classify": 4}
    if len(vals) != need[args.action]:
        raise InputError(f"padic {args.action} takes {need[args.action]} values")
    if args.action == "point":
        x = _ppoint(vals[0], args)
        rep.emit({"point": x.to_json(), "end": word_text(pp.end_word(x, args.depth))})
    elif args.action == "solve":
        m = pp.solve_sharply3(*(_ppoint(v, args) for v in vals))
        rep.emit({"matrix": m.to_rationals(), "images": ["0", "1", "inf"]})
    elif args.action == "crossratio":
        rep.emit({"valuation": pp.classical_crossratio_valuation(*(_ppoint(v, args) for v in vals))})
    elif args.action == "act":
        m = pp.Mobius.from_rationals([parse_q(v) for v in vals[:4]], p, prec)
        rep.emit({"image": pp.mobius_act(m, _ppoint(vals[4], args)).to_json()})
    elif args.action == "classify":
        g = pp.MobiusAutomorphism(([parse_q(v) for v in vals], p),
                                  rays.RegularTreeModel.bruhat_tits(p, args.depth))
        cls = aut.classify_automorphism(g)
        ratio = g.trace_valuation_ratio()
        rep.emit({**cls.to_json(), "trace_valuation_ratio": ratio})
        rep.check((cls.kind == "loxodromic") == (ratio != INF and ratio < 0))


# finite


def cmd_finite(args, rep):
    if args.action == "pgl2":
        g = fs.pgl2_fq_action(args.q)
    elif args.action == "symmetric":
        g = fs.symmetric_group(args.n)
    elif args.action == "alternating":
        g = fs.alternating_group(args.n)
    elif args.action == "check":
        g = _from(args.input, fs.FinitePermGroup.from_json)
    elif args.action == "dickson":
        nf = fs.dickson_near_field(9)
        cert = fs.verify_sharp_transitive(fs.affine_group(nf), 2)
        rep.emit({"left_distributivity_witness": nf.left_distributivity_witness,
                  "commutative": nf.is_commutative(),
                  "unit_orders": [nf.unit_order(x) for x in range(1, 9)],
                  "affine": cert.to_json()})
        rep.check(cert.sharp)
        return
    else:  # affine over F_q
        g = fs.affine_group(fs.field_near_field(args.q))
    cert = fs.verify_sharp_transitive(g, args.k)
    rep.emit({"group": g.to_json(), **cert.to_json()})
    rep.check(cert.sharp)


# suite


def cmd_suite(args, rep):
    try:
        results = suites.run_suite(args.name, args.seed)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    for r in results:
        rep.emit(r.to_json(timings=args.timings))
        rep.check(r.passed)


# argument parsing


def _rational_arg(text):
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=suites.DEFAULT_SEED)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--emit-dot", action="store_true")
    common.add_argument("--save", help="write the produced table/system as plain JSON")

    parser = argparse.ArgumentParser(prog="hypercross", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tree", parents=[common], help="metric trees (JSON or DOT)")
    t.add_argument("action", choices=["show", "random", "distance", "median", "crossratio", "point", "table"])
    t.add_argument("points", nargs="*")
    t.add_argument("--in", dest="input", default="h-tree", help="tree file, or h-tree / star")
    t.add_argument("--leaves", type=int, default=6)
    t.add_argument("--binary", action="store_true")

    c = sub.add_parser("crossratio", parents=[common], help="crossratio tables")
    c.add_argument("action", choices=["check", "path", "qu", "ball", "fit"])
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--bound", type=_rational_arg)
    c.add_argument("--p", type=_rational_arg, default=Fraction(0))
    c.add_argument("--a")
    c.add_argument("--b")
    c.add_argument("--x")
    c.add_argument("--r", type=_rational_arg, default=Fraction(1))
    c.add_argument("--lam", type=_rational_arg, default=Fraction(2))
    c.add_argument("--max-points", type=int, default=8)
    c.add_argument("--require-exact", action="store_true")

    q = sub.add_parser("qm", parents=[common], help="quasimetrics and the triple space")
    q.add_argument("action", choices=["defect", "crossratio", "triples", "geodesic"])
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--bound", type=_rational_arg)
    q.add_argument("--k", type=_rational_arg, default=Fraction(0))
    q.add_argument("--x")
    q.add_argument("--y")
    q.add_argument("--defect", action="store_true", help="also materialize and report the defect")

    a = sub.add_parser("annulus", parents=[common], help="annulus systems")
    a.add_argument("action", choices=["cylinder", "axioms", "count", "crossratio", "compare", "refine"])
    a.add_argument("atoms", nargs="*")
    a.add_argument("--in", dest="input")
    a.add_argument("--depth", type=int, default=6)
    a.add_argument("--levels")
    a.add_argument("--sample-size", type=int, default=10)
    a.add_argument("--a3-threshold", type=int, default=1)
    a.add_argument("--K", default="")
    a.add_argument("--L", default="")
    a.add_argument("--steps", type=int, default=3)
    a.add_argument("--base", type=_rational_arg, default=Fraction(1, 2))

    b = sub.add_parser("boundary", parents=[common], help="tree boundaries and dynamics")
    b.add_argument("action", choices=["crossratio", "median", "subtree", "classify", "dynamics",
                                      "conical", "interpolate"])
    b.add_argument("rays", nargs="*")
    b.add_argument("--depth", type=int, default=6)
    b.add_argument("--degree", type=int, default=3)
    b.add_argument("--binary", action="store_true")
    b.add_argument("--shift", type=int, default=1)
    b.add_argument("--base", type=_rational_arg, default=Fraction(1, 2))
    b.add_argument("--budget", type=int, default=3)
    b.add_argument("--max-power", type=int, default=12)
    b.add_argument("--length", type=int, default=4)

    p = sub.add_parser("padic", parents=[common], help="the p-adic projective line")
    p.add_argument("action", choices=["point", "solve", "crossratio", "act", "classify"])
    p.add_argument("values", nargs="*", help="rationals p/q, or inf")
    p.add_argument("--prime", type=int, default=2)
    p.add_argument("--precision", type=int, default=8)
    p.add_argument("--depth", type=int, default=6)

    f = sub.add_parser("finite", parents=[common], help="finite sharply transitive actions")
    f.add_argument("action", choices=["pgl2", "affine", "dickson", "symmetric", "alternating", "check"])
    f.add_argument("--q", type=int, default=3)
    f.add_argument("--k", type=int, default=3)
    f.add_argument("--n", type=int, default=4)
    f.add_argument("--in", dest="input")

    s = sub.add_parser("suite", parents=[common], help="acceptance suites")
    s.add_argument("name")
    s.add_argument("--timings", action="store_true")
    return parser


COMMANDS = {
    "tree": cmd_tree, "crossratio": cmd_crossratio, "qm": cmd_qm, "annulus": cmd_annulus,
    "boundary": cmd_boundary, "padic": cmd_padic, "finite": cmd_finite, "suite": cmd_suite,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    env_seed = os.environ.get("HYPERCROSS_SEED")
    if env_seed:
        try:
            args.seed = int(env_seed)
        except ValueError:
            print(json.dumps({"error": f"HYPERCROSS_SEED is not an integer: {env_seed!r}"}), file=sys.stderr)
            return EXIT_INPUT
    out = open(args.out, "w") if args.out else sys.stdout
    rep = Report(args.command, out)
    try:
        COMMANDS[args.command](args, rep)
        if args.emit_dot and rep.dot is None:
            raise InputError(f"{args.command} {getattr(args, 'action', '')} has no DOT form".rstrip())
        rep.finish()
    except InputError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except HypercrossError as exc:
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__}), file=sys.stderr)
        return EXIT_FAIL
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK if rep.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
