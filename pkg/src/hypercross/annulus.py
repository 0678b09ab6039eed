"""Annulus systems over a finite atom universe.

An annulus is a pair (minus, plus) of disjoint atom sets leaving a nonempty
gap.  At finite resolution every set is clopen, so interiors and closures
are the sets themselves.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations

import numpy as np

from hypercross import kernels
from hypercross.crossratio import CrossratioTable
from hypercross.errors import InvalidStructureError, ResolutionError
from hypercross.rational import INF


class Annulus:
    __slots__ = ("minus", "plus")

    def __init__(self, minus, plus):
        self.minus = frozenset(minus)
        self.plus = frozenset(plus)
        if not self.minus or not self.plus:
            raise InvalidStructureError("annulus sides must be nonempty")
        if self.minus & self.plus:
            raise InvalidStructureError("annulus sides overlap")

    def __neg__(self):
        return Annulus(self.plus, self.minus)

    def __eq__(self, other):
        return isinstance(other, Annulus) and self.minus == other.minus and self.plus == other.plus

    def __hash__(self):
        return hash((self.minus, self.plus))

    def __repr__(self):
        return f"Annulus({sorted(self.minus)}, {sorted(self.plus)})"

    def image(self, g):
        return Annulus({g(u) for u in self.minus}, {g(u) for u in self.plus})


def nesting_lt(a: Annulus, b: Annulus, universe) -> bool:
    """a < b: the complement of a.plus lies inside b.minus."""
    universe = frozenset(universe)
    for s in (a.minus, a.plus, b.minus, b.plus):
        if not s <= universe:
            raise InvalidStructureError("annulus outside the universe")
    return (universe - a.plus) <= b.minus


def region_lt(K, a: Annulus) -> bool:
    """K < a: K inside a.minus."""
    return frozenset(K) <= a.minus


def annulus_lt_region(a: Annulus, L) -> bool:
    """a < L: L inside a.plus."""
    return frozenset(L) <= a.plus


class AnnulusSystem:
    """Finite list of annuli over ``universe`` with a precomputed nesting
    relation."""

    def __init__(self, universe, annuli=(), symmetric=None):
        self.universe = list(universe)
        self.index = {u: i for i, u in enumerate(self.universe)}
        if len(self.index) != len(self.universe):
            raise InvalidStructureError("repeated atoms in the universe")
        uni = frozenset(self.universe)
        seen = set()
        self.annuli = []
        for a in annuli:
            if a in seen:
                continue
            if not (a.minus <= uni and a.plus <= uni):
                raise InvalidStructureError(f"{a} leaves the universe")
            if len(a.minus) + len(a.plus) >= len(self.universe):
                raise InvalidStructureError(f"{a} has an empty gap")
            seen.add(a)
            self.annuli.append(a)
        closed = all(-a in seen for a in self.annuli)
        if symmetric and not closed:
            raise InvalidStructureError("system declared symmetric but not closed under negation")
        self.symmetric = closed if symmetric is None else symmetric
        m, n = len(self.annuli), len(self.universe)
        self._minus = np.zeros((m, n), dtype=bool)
        self._plus = np.zeros((m, n), dtype=bool)
        for k, a in enumerate(self.annuli):
            self._minus[k, [self.index[u] for u in a.minus]] = True
            self._plus[k, [self.index[u] for u in a.plus]] = True
        # a < b iff no atom lies outside both a.plus and b.minus
        if m:
            outside = (~self._plus).astype(np.float32) @ (~self._minus).astype(np.float32).T
            self.lt = (outside == 0).astype(np.uint8)
        else:
            self.lt = np.zeros((0, 0), dtype=np.uint8)
        self._order = np.argsort(self._minus.sum(axis=1), kind="stable")

    def __len__(self):
        return len(self.annuli)

    def __iter__(self):
        return iter(self.annuli)

    def _mask(self, region):
        try:
            return [self.index[u] for u in region]
        except KeyError as exc:
            raise InvalidStructureError(f"atom {exc.args[0]!r} not in the universe") from None

    def separation_count(self, K, L):
        """Longest chain K < A_1 < ... < A_n < L inside the system."""
        if not K or not L:
            raise InvalidStructureError("K and L must be nonempty")
        if not len(self.annuli):
            return 0
        k, l = self._mask(K), self._mask(L)
        active = self._minus[:, k].all(axis=1) & self._plus[:, l].all(axis=1)
        order = self._order[active[self._order]]
        return kernels.longest_chain(self.lt, order)

    def longest_chain(self):
        return kernels.longest_chain(self.lt, self._order)

    def crossratio(self, x, y, z, w):
        """(xy|zw) as a separation count, symmetrized over the two directions."""
        if {x, y} & {z, w}:
            return 0
        return max(self.separation_count({x, y}, {z, w}), self.separation_count({z, w}, {x, y}))

    def pair_count(self, x, y):
        """(x|y): separation count of the two singletons, either direction."""
        return max(self.separation_count({x}, {y}), self.separation_count({y}, {x}))

    def check_partial_order(self):
        """Irreflexive, antisymmetric and transitive; raises otherwise."""
        lt = self.lt.astype(bool)
        if lt.diagonal().any():
            raise InvalidStructureError("nesting is not irreflexive")
        if (lt & lt.T).any():
            raise InvalidStructureError("nesting is not antisymmetric")
        two = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
        if (two & ~lt).any():
            raise InvalidStructureError("nesting is not transitive")
        return True

    def extended(self, annuli):
        return AnnulusSystem(self.universe, list(self.annuli) + list(annuli))

    def to_json(self):
        enc = _encode_atom
        return {
            "universe": [enc(u) for u in self.universe],
            "annuli": [{"minus": sorted(enc(u) for u in a.minus), "plus": sorted(enc(u) for u in a.plus)}
                       for a in self.annuli],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        dec = _decode_atom
        universe = [dec(u) for u in data["universe"]]
        annuli = [Annulus([dec(u) for u in a["minus"]], [dec(u) for u in a["plus"]]) for a in data["annuli"]]
        return cls(universe, annuli)


def _encode_atom(u):
    return list(u) if isinstance(u, tuple) else u


def _decode_atom(u):
    return tuple(u) if isinstance(u, list) else u


def separation_count(K, L, sys: AnnulusSystem):
    return sys.separation_count(K, L)


def induced_crossratio(sys: AnnulusSystem, sample) -> CrossratioTable:
    sample = list(sample)
    if len(sample) < 4:
        raise InvalidStructureError("need at least 4 sample atoms")
    return CrossratioTable.from_function(sample, lambda x, y, z, w: Fraction(sys.crossratio(x, y, z, w)))


def check_axioms(sys: AnnulusSystem, sample, a3_threshold=1, d=None, a4_min_distance=None):
    """Finite-resolution report on the four axioms over ``sample``.

    a2_k is the least k such that no sampled 4-set has two dual values
    above k.  (A3) asks (x|yz) >= a3_threshold on distinct triples; (A4)
    asks (x|y) > 0 on distinct pairs, restricted to d(x, y) >=
    a4_min_distance when a metric is given.
    """
    sample = list(sample)
    values = []
    a2_k = 0
    for x, y, z, w in combinations(sample, 4):
        v = sorted((sys.crossratio(x, y, z, w), sys.crossratio(x, z, y, w), sys.crossratio(x, w, y, z)))
        values.extend(v)
        a2_k = max(a2_k, v[1])
    a3_min = None
    for x in sample:
        for y, z in combinations([u for u in sample if u != x], 2):
            v = sys.separation_count({x}, {y, z})
            a3_min = v if a3_min is None else min(a3_min, v)
    a4_fail = []
    for x, y in combinations(sample, 2):
        if d is not None and a4_min_distance is not None and d(x, y) < a4_min_distance:
            continue
        if sys.pair_count(x, y) == 0:
            a4_fail.append((x, y))
    return {
        "a1": all(v != INF for v in values),
        "a2_k": a2_k,
        "a3_min": a3_min,
        "a3": a3_min is not None and a3_min >= a3_threshold,
        "a4": not a4_fail,
        "a4_failures": a4_fail,
    }


# metric quantities


def diameter(S, d, atom_diameter=0):
    """Largest pairwise distance; a single atom still has ``atom_diameter``."""
    S = list(S)
    if not S:
        raise InvalidStructureError("empty set has no diameter")
    best = Fraction(atom_diameter)
    for u, v in combinations(S, 2):
        best = max(best, d(u, v))
    return best


def set_distance(S, T, d):
    return min(d(u, v) for u in S for v in T)


def annulus_metrics(a: Annulus, d, atom_diameter=0):
    """(lambda, mu): the smaller side diameter and the gap between the sides."""
    lam = min(diameter(a.minus, d, atom_diameter), diameter(a.plus, d, atom_diameter))
    return lam, set_distance(a.minus, a.plus, d)


def ball(universe, x, r, d):
    return frozenset(u for u in universe if d(u, x) <= r)


def small_separating_annulus(x, y, K, s, d, universe, atom_diameter=0):
    """Annulus (B(x, r), B(y, r)) with lambda(gA) < s for all g in K.

    Radii run over the distances present in the universe from the largest
    down; the first admissible pair wins.  Raises ResolutionError when even
    the finest balls are too large.
    """
    if x == y:
        raise InvalidStructureError("x and y must differ")
    universe = list(universe)
    K = list(K) or [lambda u: u]
    radii = sorted({d(x, u) for u in universe} | {d(y, u) for u in universe}, reverse=True)
    for r in radii:
        bx, by = ball(universe, x, r, d), ball(universe, y, r, d)
        if bx & by or len(bx) + len(by) >= len(universe):
            continue
        A = Annulus(bx, by)
        if all(annulus_metrics(A.image(g), d, atom_diameter)[0] < s for g in K):
            return A
    raise ResolutionError(f"no annulus separating {x!r} and {y!r} with lambda < {s} at this resolution")


def build_cover_system(triples, neighborhoods, group_sample, universe) -> AnnulusSystem:
    """The symmetric system {gA_i, -gA_i} with A_i = (U_i, V_i) for each
    triple and its neighbourhoods (U_i, V_i, W_i)."""
    annuli = []
    for t, (U, V, W) in zip(triples, neighborhoods):
        U, V, W = frozenset(U), frozenset(V), frozenset(W)
        if U & V or U & W or V & W:
            raise InvalidStructureError(f"neighbourhoods of {t} overlap")
        x, y, z = t
        if x not in U or y not in V or z not in W:
            raise InvalidStructureError(f"triple {t} is not inside its neighbourhoods")
        A = Annulus(U, V)
        for g in group_sample:
            gA = A.image(g)
            annuli.extend([gA, -gA])
    return AnnulusSystem(universe, annuli)


def two_zeros_violations(sys: AnnulusSystem, sample):
    """Sampled 4-sets where fewer than two of the three dual values vanish."""
    bad = []
    for x, y, z, w in combinations(list(sample), 4):
        vals = (sys.crossratio(x, y, z, w), sys.crossratio(x, z, y, w), sys.crossratio(x, w, y, z))
        if sum(v == 0 for v in vals) < 2:
            bad.append(((x, y, z, w), vals))
    return bad


def pairs_at_least(sample, d, r):
    return [(x, y) for x, y in combinations(list(sample), 2) if d(x, y) >= r]


def refine_system_step(sys: AnnulusSystem, n, d, group_sample, sample=None, atom_diameter=0):
    """One step of the inductive construction, over the sampled atoms.

    Checks the level-n invariants, then adds, for each sampled pair at
    distance >= 1/(n+1), an annulus with lambda < min(mu/2, 1/(n+2)) and
    mu > 1/(n+2), together with its images and negatives.  mu is the least
    gap over the input system (infinite when it is empty); isometries keep
    gaps, so the orbit supremum is the gap itself.
    """
    sample = list(sys.universe if sample is None else sample)
    group_sample = list(group_sample) or [lambda u: u]
    bad = two_zeros_violations(sys, sample)
    if bad:
        raise InvalidStructureError(f"two-zeros invariant fails on {bad[0][0]}")
    if n >= 1:
        for x, y in pairs_at_least(sample, d, Fraction(1, n)):
            if sys.pair_count(x, y) == 0:
                raise InvalidStructureError(f"(x|y)_{n} vanishes on the pair {x!r}, {y!r}")
    mu = min((set_distance(a.minus, a.plus, d) for a in sys.annuli), default=None)
    bound = Fraction(1, n + 2)
    s = bound if mu is None else min(mu / 2, bound)
    new = []
    for x, y in pairs_at_least(sample, d, Fraction(1, n + 1)):
        A = small_separating_annulus(x, y, group_sample, s, d, sys.universe, atom_diameter)
        if set_distance(A.minus, A.plus, d) <= bound:
            raise ResolutionError(f"gap of the annulus for {x!r}, {y!r} is not above {bound}")
        for g in group_sample:
            gA = A.image(g)
            new.extend([gA, -gA])
    out = sys.extended(new)
    bad = two_zeros_violations(out, sample)
    if bad:
        raise InvalidStructureError(f"refined system breaks the two-zeros invariant on {bad[0][0]}")
    return out


def cylinder_system(model, depth, levels=None) -> AnnulusSystem:
    """Annuli (H(v->u), H(v->w)) for each vertex v and ordered pair of
    distinct neighbours u, w, over the depth-``depth`` atoms.  Vertices of
    degree 2 give no annulus (the gap would be empty)."""
    from hypercross.tree_boundary.rays import half_tree_atoms

    levels = range(depth) if levels is None else levels
    universe = model.level(depth)
    annuli = []
    for k in levels:
        if not 0 <= k < depth:
            raise InvalidStructureError(f"level {k} outside 0..{depth - 1}")
        for v in model.level(k):
            nb = model.neighbors(v)
            if len(nb) < 3:
                continue
            sides = {u: half_tree_atoms(model, v, u, depth) for u in nb}
            for u in nb:
                for w in nb:
                    if u != w:
                        annuli.append(Annulus(sides[u], sides[w]))
    return AnnulusSystem(universe, annuli)
