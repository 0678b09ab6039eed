"""Dynamics on tree boundaries at finite resolution.

Boundary points are resolved to atoms: the words of a fixed depth D, each
standing for its cylinder.  The graph of an automorphism g is stored as
cells (x, y) with y in the image of the cylinder of x, and distances are
visual (base ** lcp) with the max metric on M x M.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from hypercross import kernels
from hypercross.errors import InvalidStructureError, NoWitnessError, ResolutionError
from hypercross.quasimetric import triple_rho
from hypercross.tree_boundary.automorphism import (
    Composite,
    PortraitAutomorphism,
    TreeAutomorphism,
    classify_automorphism,
)
from hypercross.tree_boundary.rays import (
    BoundaryPoint,
    RegularTreeModel,
    VisualMetric,
    boundary_crossratio,
    ray_lcp,
    ray_median,
    word_lcp,
)


class AtomSpace:
    """Depth-D atoms of a tree model with their closeness levels."""

    def __init__(self, model: RegularTreeModel, depth, base=Fraction(1, 2)):
        self.model = model
        self.depth = depth
        self.metric = VisualMetric(depth, base)
        self.atoms = model.level(depth)
        self.index = {w: i for i, w in enumerate(self.atoms)}
        W = np.array(self.atoms, dtype=np.int64).reshape(len(self.atoms), depth)
        eq = W[:, None, :] == W[None, :, :]
        self.levels = np.cumprod(eq, axis=2).sum(axis=2).astype(np.int64)

    def __len__(self):
        return len(self.atoms)

    def span(self, v):
        """Index range of the atoms below the vertex v."""
        v = tuple(v)[:self.depth]
        lo = bisect_left(self.atoms, v)
        hi = bisect_left(self.atoms, v + (10 ** 9,))
        return lo, hi

    def atom_of(self, x):
        word = x.word(self.depth) if isinstance(x, BoundaryPoint) else tuple(x)[:self.depth]
        return self.index[word]

    def region(self, g: TreeAutomorphism, i):
        """Indices of atoms meeting g(cylinder of atom i)."""
        x = self.atoms[i]
        gx, gp = g.image(x), g.image(x[:-1])
        if len(gx) == len(gp) + 1 and gx[:-1] == gp:
            lo, hi = self.span(gx)
            return range(lo, hi)
        if len(gp) > self.depth:
            return range(len(self.atoms))
        lo, hi = self.span(gp)
        return list(range(lo)) + list(range(hi, len(self.atoms)))

    def regions(self, g):
        return [self.region(g, i) for i in range(len(self.atoms))]

    def cells(self, g, regions=None):
        regions = self.regions(g) if regions is None else regions
        out = [(i, j) for i, reg in enumerate(regions) for j in reg]
        return np.array(out, dtype=np.int64)

    def hausdorff_level(self, g, P, Q, cells=None):
        cells = self.cells(g) if cells is None else cells
        return kernels.hausdorff_level(self.levels, cells, list(P), list(Q))

    def distance(self, level):
        return self.metric.level_to_distance(level)


@dataclass
class CollapsingLimit:
    a: BoundaryPoint
    c: BoundaryPoint
    trace: list  # Hausdorff distances, one per element
    levels: list = field(default_factory=list)

    def to_json(self):
        return {
            "a": list(self.a.prefix),
            "c": list(self.c.prefix),
            "trace": [{"i": i, "hausdorff": _fmt(h)} for i, h in enumerate(self.trace)],
        }


def _fmt(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _space_for(seq, depth, base):
    if not seq:
        raise InvalidStructureError("empty sequence")
    model = seq[0].model
    return AtomSpace(model, model.depth if depth is None else depth, base)


def _profile(space, regions):
    """(atom with the largest image, most-hit atom) for one element."""
    sizes = [len(r) for r in regions]
    hits = np.zeros(len(space), dtype=np.int64)
    for r in regions:
        for j in r:
            hits[j] += 1
    return int(np.argmax(sizes)), int(np.argmax(hits)), sizes, hits


def collapsing_trace(seq, a, c, depth=None, base=Fraction(1, 2)):
    """Hausdorff distances of graph(g_i) to {a}#{c} at resolution ``depth``."""
    space = _space_for(seq, depth, base)
    ia, ic = space.atom_of(a), space.atom_of(c)
    return [space.distance(space.hausdorff_level(g, [ia], [ic])) for g in seq]


def collapsing_limit(seq, depth=None, base=Fraction(1, 2), tol_level=None):
    """Detect a collapsing pair (a, c) for the sequence, or None.

    a is the atom whose cylinder has the largest image, c the atom hit by
    the most images; both must be constant over the second half of the
    sequence and the final Hausdorff distance must be within
    base ** tol_level (default D // 2).
    """
    space = _space_for(seq, depth, base)
    D = space.depth
    tol_level = D // 2 if tol_level is None else tol_level
    profiles = []
    cells = []
    for g in seq:
        regions = space.regions(g)
        cells.append(space.cells(g, regions))
        profiles.append(_profile(space, regions)[:2])
    tail = profiles[len(profiles) // 2:]
    if len(seq) < 2 or len(set(tail)) != 1:
        return None
    ia, ic = tail[0]
    levels = [space.hausdorff_level(g, [ia], [ic], cl) for g, cl in zip(seq, cells)]
    if levels[-1] < tol_level:
        return None
    return CollapsingLimit(BoundaryPoint.truncated(space.atoms[ia]),
                           BoundaryPoint.truncated(space.atoms[ic]),
                           [space.distance(h) for h in levels], levels)


def eventually_monotone(trace):
    """Index from which the trace never increases (len(trace) if it ends on a rise)."""
    k = len(trace) - 1
    while k > 0 and trace[k - 1] >= trace[k]:
        k -= 1
    return k


@dataclass
class GerasimovLimit:
    P: list
    Q: list
    residual: Fraction
    trace: list

    def to_json(self):
        return {
            "P": [list(x.prefix) for x in self.P],
            "Q": [list(x.prefix) for x in self.Q],
            "residual": _fmt(self.residual),
            "trace": [{"i": i, "hausdorff": _fmt(h)} for i, h in enumerate(self.trace)],
        }


def gerasimov_limit(seq, n, depth=None, base=Fraction(1, 2), tol_level=None, max_candidates=6):
    """Smallest nonempty P, Q with |P| + |Q| <= n - 1 whose P#Q contains the
    tail graphs of the sequence up to base ** tol_level.

    Candidates are the atoms with the largest images (for P) and the most
    hits (for Q) over the last quarter of the sequence.  Raises
    NoWitnessError when nothing fits the budget.
    """
    if n < 2:
        raise InvalidStructureError("budget n must be at least 2")
    space = _space_for(seq, depth, base)
    D = space.depth
    tol_level = D // 2 if tol_level is None else tol_level
    start = len(seq) - max(1, len(seq) // 4)
    tail = seq[start:]
    tail_cells = []
    size_tot = np.zeros(len(space), dtype=np.int64)
    hit_tot = np.zeros(len(space), dtype=np.int64)
    for g in tail:
        regions = space.regions(g)
        tail_cells.append(space.cells(g, regions))
        _, _, sizes, hits = _profile(space, regions)
        size_tot += np.array(sizes)
        hit_tot += hits
    half = max(1, max_candidates // 2)
    cand_p = [int(i) for i in np.argsort(-size_tot, kind="stable")[:half]]
    cand_q = [int(i) for i in np.argsort(-hit_tot, kind="stable")[:half]]

    def fits(P, Q):
        return all(space.hausdorff_level(g, P, Q, cl) >= tol_level for g, cl in zip(tail, tail_cells))

    budget = n - 1
    for total in range(2, budget + 1):
        for kp in range(1, total):
            kq = total - kp
            for P in combinations(cand_p, kp):
                for Q in combinations(cand_q, kq):
                    if not fits(P, Q):
                        continue
                    for P2, Q2 in _proper_subpairs(P, Q):
                        if fits(P2, Q2):
                            raise InvalidStructureError("size-ordered search returned a non-minimal pair")
                    trace = [space.distance(space.hausdorff_level(g, P, Q)) for g in seq]
                    return GerasimovLimit(
                        [BoundaryPoint.truncated(space.atoms[i]) for i in P],
                        [BoundaryPoint.truncated(space.atoms[j]) for j in Q],
                        trace[-1], trace)
    raise NoWitnessError(f"no P, Q with |P| + |Q| <= {budget} fits at depth {D}")


def _proper_subpairs(P, Q):
    for kp in range(1, len(P) + 1):
        for kq in range(1, len(Q) + 1):
            if kp == len(P) and kq == len(Q):
                continue
            for P2 in combinations(P, kp):
                for Q2 in combinations(Q, kq):
                    yield P2, Q2


# conical limit points


def transport_portrait(model, src: BoundaryPoint, dst: BoundaryPoint):
    """Root-fixing automorphism carrying the ray src onto dst exactly: at
    each vertex of src it swaps the next letter of src with that of dst."""

    def portrait(v):
        k = len(v)
        if v != src.word(k):
            return None
        s, d = src.letter(k), dst.letter(k)
        if s == d:
            return None
        perm = list(range(model.branching(k)))
        perm[s], perm[d] = d, s
        return tuple(perm)

    return PortraitAutomorphism(model, portrait)


@dataclass
class ConicalWitness:
    x: BoundaryPoint
    b: BoundaryPoint
    c: BoundaryPoint
    steps: int
    conjugated: bool
    trace: list
    tukia_separation: Fraction
    tukia_approach: list

    def to_json(self):
        return {
            "x": self.x.to_json(), "b": list(self.b.prefix), "c": list(self.c.prefix),
            "steps": self.steps, "conjugated": self.conjugated,
            "trace": [{"i": i + 1, "hausdorff": _fmt(h)} for i, h in enumerate(self.trace)],
            "tukia_separation": _fmt(self.tukia_separation),
            "tukia_approach": self.tukia_approach,
        }


def _far_rays(model, avoid, count):
    """Periodic rays leaving the root region away from ``avoid``."""
    cands = [BoundaryPoint(w, (0,)) for w in model.level(2)]
    cands.sort(key=lambda r: max(word_lcp(r.word(2), a.word(2)) for a in avoid))
    out = []
    for r in cands:
        if all(r != a for a in avoid + out):
            out.append(r)
        if len(out) == count:
            return out
    raise NoWitnessError("no auxiliary rays available")


def conical_witness(x: BoundaryPoint, g: TreeAutomorphism, depth=6, conjugators=(), max_steps=None):
    """Verify at resolution ``depth`` that x is a conical limit point.

    g must be loxodromic with exact periodic ends.  If x is the repelling
    end of g the sequence is g^i; otherwise a conjugator h with h(repelling)
    = x is taken from ``conjugators`` or built as a transport portrait, and
    the sequence is h g^i h^-1.  Checked: every atom other than the one of
    x is mapped into the atom of c, and gamma_i(x) -> b != c.  Tukia's form:
    x_i = gamma_i^-1(w) approaches x while gamma_i(x, z, x_i) stays
    uniformly separated.
    """
    cls = classify_automorphism(g)
    if cls.kind != "loxodromic":
        raise InvalidStructureError(f"conical witness needs a loxodromic element, got {cls.kind}")
    if not hasattr(g, "exact_ends"):
        raise ResolutionError("element does not expose exact ends")
    attr, rep = g.exact_ends()
    model = g.model
    space = AtomSpace(model, depth)
    h = None
    if x == rep:
        gamma = g
    else:
        for cand in conjugators:
            if cand.ray_image(rep, depth + 4) == x.word(depth + 4):
                h = cand
                break
        if h is None:
            h = transport_portrait(model, rep, x)
        gamma = None
    c = BoundaryPoint.truncated(attr.word(depth) if h is None else h.ray_image(attr, depth))
    if c.prefix == x.word(depth):
        raise NoWitnessError("attracting and repelling ends coincide at this depth")
    ix, ic = space.atom_of(x), space.atom_of(c)
    c_lo, c_hi = space.span(c.prefix)
    max_steps = max_steps or 8 * depth + 4 * len(g.image(())) + 8

    def step(i):
        gi = g.power(i)
        return gi if h is None else Composite(h, Composite(gi, h.inverse()))

    trace, bs = [], []
    for i in range(1, max_steps + 1):
        gam = step(i)
        bs.append(gam.ray_image(x, depth))
        trace.append(space.distance(space.hausdorff_level(gam, [ix], [ic])))
        bad = None
        for j in range(len(space)):
            if j == ix:
                continue
            reg = space.region(gam, j)
            if not all(c_lo <= k < c_hi for k in reg):
                bad = space.atoms[j]
                break
        if bad is None:
            break
    else:
        raise NoWitnessError(f"cylinder {bad} not collapsed to {c.prefix} after {max_steps} steps")
    steps = len(bs)
    b = BoundaryPoint.truncated(bs[-1])
    if len(bs) >= 2 and bs[-1] != bs[-2]:
        raise NoWitnessError("gamma_i(x) has not stabilized")
    if b.prefix == c.prefix:
        raise NoWitnessError("gamma_i(x) converges to the collapse point")
    # Tukia's reformulation
    w, z = _far_rays(model, [x, c, b], 2)
    metric = space.metric
    sep = None
    approach = []
    for i in range(1, steps + 1):
        gam = step(i)
        xi = gam.inverse().ray_point(w, depth)
        approach.append(word_lcp(xi.prefix, x.word(depth)))
        img = [gam.ray_image(x, depth), gam.ray_image(z, depth), w.word(depth)]
        for u, v in combinations(img, 2):
            d = metric(u, v) if u != v else Fraction(0)
            sep = d if sep is None else min(sep, d)
    if sep == 0:
        raise NoWitnessError("Tukia triples collapse")
    if approach[-1] < depth:
        raise NoWitnessError(f"x_i approaches x only to depth {approach[-1]}")
    return ConicalWitness(x, b, c, steps, h is not None, trace, sep, approach)


# geodesic interpolation and the triple-space embedding


def _geodesic_position(a, b, v, lab):
    """Signed position of v on the geodesic (b, a); 0 at the meet of a, b."""
    if v == a.word(len(v)):
        return len(v) - lab
    return -(len(v) - lab)


def _geodesic_vertex(a, b, s, lab):
    return a.word(lab + s) if s >= 0 else b.word(lab - s)


def interpolated_ray(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, length, model: RegularTreeModel):
    """Rays x_-length, ..., x_0 = c, ..., x_length leaving the geodesic
    (b, a) at unit steps, so that (b x_i | a x_j) = j - i for i < j."""
    if a == b:
        raise InvalidStructureError("a and b must be distinct")
    if c == a or c == b:
        raise InvalidStructureError("c must differ from a and b")
    lab = ray_lcp(a, b)
    q0 = ray_median(a, b, c)
    s0 = _geodesic_position(a, b, q0, lab)
    out = []
    for i in range(-length, length + 1):
        if i == 0:
            out.append(c)
            continue
        q = _geodesic_vertex(a, b, s0 + i, lab)
        on_axis = {_geodesic_vertex(a, b, s0 + i + 1, lab), _geodesic_vertex(a, b, s0 + i - 1, lab)}
        off = [v for v in model.neighbors(q) if v not in on_axis]
        if not off:
            raise ResolutionError(f"vertex {q} has no neighbour off the geodesic")
        nxt = off[0]
        if len(nxt) > len(q):
            out.append(BoundaryPoint(nxt, (0,)))
        else:
            # leave upward: go to the parent, then down a sibling of q
            sib = next(k for k in range(model.branching(len(nxt))) if k != q[-1])
            out.append(BoundaryPoint(nxt + (sib,), (0,)))
    return out


def _cr(model, depth):
    def cr(x, y, z, w):
        return Fraction(boundary_crossratio(model, x, y, z, w, depth))

    return cr


def _exact_depth(points):
    return max(len(p.prefix) for p in points) + 2 * max(len(p.period) or 1 for p in points) + 4


@dataclass
class TripleGeodesic:
    triples: list
    rho: dict
    max_deviation: Fraction
    centre_deviation: Fraction | None = None


def ray_triple_geodesic(a, b, length, model, centre=None, centre_length=None):
    """Triples X_i = (b, a, x_i) along an interpolated window through
    c = ``centre[2]`` (or the first window ray) and the deviations
    max |rho(X_i, X_j) - |i - j||.

    With ``centre = (x, y, z)`` also reports the largest Gromov product at
    (x, y, z) between the representatives of the ends x, y, z (triples far
    along interpolated windows), which vanishes when (x, y, z) is a centre.
    """
    if a == b:
        raise InvalidStructureError("a and b must be distinct")
    c = centre[2] if centre is not None else _far_rays(model, [a, b], 1)[0]
    xs = interpolated_ray(a, b, c, length, model)
    depth = _exact_depth([a, b, c] + xs)
    cr = _cr(model, depth)
    triples = [(b, a, x) for x in xs]
    rho = {}
    dev = Fraction(0)
    for i, X in enumerate(triples):
        for j in range(i, len(triples)):
            r = Fraction(0) if i == j else triple_rho(cr, X, triples[j])
            rho[(i - length, j - length)] = r
            dev = max(dev, abs(r - (j - i)))
    out = TripleGeodesic(triples, rho, dev)
    if centre is not None:
        out.centre_deviation = centre_deviation(centre, model, centre_length or length)
    return out


def centre_deviation(triple, model, L):
    """Largest Gromov product at the triple between far representatives of
    its three ends."""
    x, y, z = triple
    reps = []
    for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
        far = interpolated_ray(a, b, c, L, model)[-1]
        reps.append((b, a, far))
    pts = [x, y, z] + [r[2] for r in reps]
    cr = _cr(model, _exact_depth(pts))
    C = tuple(triple)
    dev = Fraction(0)
    for P, Q in combinations(reps, 2):
        gp = (triple_rho(cr, C, P) + triple_rho(cr, C, Q) - triple_rho(cr, P, Q)) / 2
        dev = max(dev, abs(gp))
    return dev


def min_separation(triple, depth, base=Fraction(1, 2)):
    """Smallest pairwise visual distance inside a triple of rays."""
    metric = VisualMetric(depth, base)
    return min(metric(u.word(depth), v.word(depth)) if u.word(depth) != v.word(depth) else Fraction(0)
               for u, v in combinations(triple, 2))
