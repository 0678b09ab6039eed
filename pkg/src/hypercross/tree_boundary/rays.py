"""Rooted locally finite trees, boundary rays, cylinders and the boundary
crossratio.

Vertices are words (tuples of child indices) read from the root ``()``.
The root has ``root_children`` children; every other vertex has
``children`` children, so ``RegularTreeModel(3, 2)`` is the 3-regular tree
and ``RegularTreeModel(p + 1, p)`` the Bruhat-Tits tree of Q_p.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import lcm

from hypercross.errors import InvalidStructureError, ResolutionError
from hypercross.metric_tree import MetricTree


@dataclass(frozen=True)
class RegularTreeModel:
    root_children: int
    children: int
    depth: int = 8

    def __post_init__(self):
        if self.children < 1 or self.root_children < 2:
            raise InvalidStructureError("degrees must be at least 2")
        if self.depth < 1:
            raise InvalidStructureError("depth cap must be at least 1")

    @classmethod
    def binary(cls, depth=8):
        return cls(2, 2, depth)

    @classmethod
    def regular(cls, degree, depth=8):
        return cls(degree, degree - 1, depth)

    @classmethod
    def bruhat_tits(cls, p, depth=8):
        return cls(p + 1, p, depth)

    def with_depth(self, depth):
        return RegularTreeModel(self.root_children, self.children, depth)

    def branching(self, level):
        return self.root_children if level == 0 else self.children

    def check_word(self, word):
        for i, a in enumerate(word):
            if not 0 <= a < self.branching(i):
                raise InvalidStructureError(f"letter {a} at position {i} out of range")

    def degree(self, v):
        return self.branching(len(v)) + (1 if v else 0)

    def neighbors(self, v):
        out = [v + (a,) for a in range(self.branching(len(v)))]
        if v:
            out.append(v[:-1])
        return out

    def level(self, n):
        """All vertices at distance n from the root, in lexicographic order."""
        if n == 0:
            return [()]
        ranges = [range(self.root_children)] + [range(self.children)] * (n - 1)
        return [tuple(w) for w in product(*ranges)]

    def ball(self, n=None):
        n = self.depth if n is None else n
        out = []
        for k in range(n + 1):
            out.extend(self.level(k))
        return out

    def level_size(self, n):
        return 1 if n == 0 else self.root_children * self.children ** (n - 1)


def word_lcp(u, v):
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return n


def vertex_distance(u, v):
    return len(u) + len(v) - 2 * word_lcp(u, v)


def vertex_toward(u, v, t):
    """The vertex at distance t from u on the path to v."""
    c = word_lcp(u, v)
    up = len(u) - c
    if t <= up:
        return u[:len(u) - t]
    return v[:c + (t - up)]


def vertex_median(u, v, w):
    a, b, c = word_lcp(u, v), word_lcp(u, w), word_lcp(v, w)
    top = max(a, b, c)
    if top == a:
        return u[:a]
    if top == b:
        return u[:b]
    return v[:c]


class BoundaryPoint:
    """An end of the tree: an eventually periodic word ``prefix + period*``
    or a word truncated at a finite depth (``period`` empty)."""

    __slots__ = ("prefix", "period")

    def __init__(self, prefix, period=()):
        self.prefix = tuple(prefix)
        self.period = tuple(period)

    @classmethod
    def truncated(cls, word):
        return cls(word, ())

    @property
    def is_periodic(self):
        return bool(self.period)

    @property
    def known_depth(self):
        return None if self.period else len(self.prefix)

    def letter(self, i):
        if i < len(self.prefix):
            return self.prefix[i]
        if not self.period:
            raise ResolutionError(f"ray known only to depth {len(self.prefix)}")
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def word(self, n):
        if n <= len(self.prefix):
            return self.prefix[:n]
        if not self.period:
            raise ResolutionError(f"ray known only to depth {len(self.prefix)}, asked for {n}")
        return tuple(self.letter(i) for i in range(n))

    def _horizon(self, other):
        """Depth beyond which two rays either stay equal or the answer is unknown."""
        if self.period and other.period:
            return max(len(self.prefix), len(other.prefix)) + lcm(len(self.period), len(other.period))
        return min(self.known_depth or 10 ** 9, other.known_depth or 10 ** 9)

    def lcp(self, other, cap=None):
        """Length of the common prefix; ``None`` if equal up to the horizon/cap."""
        h = self._horizon(other)
        if cap is not None:
            h = min(h, cap)
        for i in range(h):
            if self.letter(i) != other.letter(i):
                return i
        return None

    def same_at(self, other, depth):
        return self.word(depth) == other.word(depth)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        if self.period and other.period:
            return self.lcp(other) is None
        return self.prefix == other.prefix and self.period == other.period

    def __hash__(self):
        if self.period:
            # canonical form: minimal period, shortest preperiod
            per = _min_period(self.period)
            pre = list(self.prefix)
            while pre and pre[-1] == per[-1]:
                per = per[-1:] + per[:-1]
                pre.pop()
            return hash((tuple(pre), per))
        return hash((self.prefix, ()))

    def __repr__(self):
        body = "".join(map(str, self.prefix))
        if self.period:
            return f"BoundaryPoint({body}({''.join(map(str, self.period))})*)"
        return f"BoundaryPoint({body}|)"

    def to_json(self):
        return {"prefix": list(self.prefix), "period": list(self.period)}


def _min_period(per):
    n = len(per)
    for d in range(1, n + 1):
        if n % d == 0 and per[:d] * (n // d) == per:
            return per[:d]
    return per


def ray_lcp(x: BoundaryPoint, y: BoundaryPoint, depth=None):
    """Common-prefix length; raises if the rays cannot be told apart."""
    n = x.lcp(y, cap=depth)
    if n is None:
        raise ResolutionError(f"rays {x} and {y} are indistinguishable"
                              + (f" at depth {depth}" if depth is not None else ""))
    return n


def boundary_crossratio(t: RegularTreeModel, x, y, z, w, depth=None):
    """Graph distance between the bi-infinite geodesics [x,y] and [z,w].

    Equal to max(0, |xy| + |zw| - |xz| - |yw|) with |uv| the common-prefix
    length of the rays; this is the tree crossratio of deep truncations.
    """
    depth = t.depth if depth is None else depth
    pts = (x, y, z, w)
    for a, b in combinations(range(4), 2):
        ray_lcp(pts[a], pts[b], depth)
    lxy = ray_lcp(x, y, depth)
    lzw = ray_lcp(z, w, depth)
    lxz = ray_lcp(x, z, depth)
    lyw = ray_lcp(y, w, depth)
    return max(0, lxy + lzw - lxz - lyw)


def ray_median(x, y, z, depth=None):
    """Vertex where the three geodesics between the ends x, y, z meet."""
    a, b, c = ray_lcp(x, y, depth), ray_lcp(x, z, depth), ray_lcp(y, z, depth)
    top = max(a, b, c)
    if top == a or top == b:
        return x.word(top)
    return y.word(top)


def boundary_table(t: RegularTreeModel, rays, depth=None):
    from hypercross.crossratio import CrossratioTable

    rays = list(rays)
    return CrossratioTable.from_function(
        range(len(rays)),
        lambda a, b, c, d: Fraction(boundary_crossratio(t, rays[a], rays[b], rays[c], rays[d], depth)))


def vertex_name(v):
    return "r" + "".join(f".{a}" for a in v)


def approximating_subtree(t: RegularTreeModel, F, depth=None):
    """Subtree spanned by the root and the pairwise meeting vertices of F.

    Each ray x is embedded at a pendant vertex one step past its deepest
    meeting vertex t_x, so the embedding is injective.  Returns
    ``(tree, mapping, deviation)`` where the deviation compares the tree
    crossratio of the embedded nodes with ``boundary_crossratio`` over all 4-subsets.
    """
    from hypercross.metric_tree import tree_crossratio

    F = list(F)
    if len(F) > 8:
        raise InvalidStructureError("approximating_subtree is limited to 8 rays")
    depth = t.depth if depth is None else depth
    if len(F) < 2:
        raise InvalidStructureError("need at least two rays")
    deepest = []
    for i, x in enumerate(F):
        m = max(ray_lcp(x, y, depth) for j, y in enumerate(F) if j != i)
        if m + 1 > depth:
            raise ResolutionError(f"depth {depth} too small to separate the rays")
        deepest.append(x.word(m + 1))
    verts = {()}
    for w in deepest:
        for k in range(len(w) + 1):
            verts.add(w[:k])
    edges = [(vertex_name(v[:-1]), vertex_name(v), 1) for v in sorted(verts) if v]
    tree = MetricTree(edges, leaves=[vertex_name(w) for w in deepest])
    mapping = {i: vertex_name(w) for i, w in enumerate(deepest)}
    dev = 0
    for quad in combinations(range(len(F)), 4):
        a, b, c, d = quad
        for p, q, r, s in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
            want = boundary_crossratio(t, F[p], F[q], F[r], F[s], depth)
            got = tree_crossratio(tree, mapping[p], mapping[q], mapping[r], mapping[s])
            dev = max(dev, abs(got - want))
    return tree, mapping, Fraction(dev)


class VisualMetric:
    """Visual metric base**lcp on depth-``depth`` atoms (words).

    Distinct atoms sit at base**lcp; an atom stands for a cylinder whose own
    diameter is base**depth.
    """

    def __init__(self, depth, base=Fraction(1, 2)):
        self.depth = depth
        self.base = Fraction(base)
        self.atom_diameter = self.base ** depth

    def __call__(self, u, v):
        if u == v:
            return Fraction(0)
        return self.base ** word_lcp(u, v)

    def level_to_distance(self, level):
        return self.base ** level


def atoms(t: RegularTreeModel, depth=None):
    return t.level(t.depth if depth is None else depth)


def cylinder(t: RegularTreeModel, v, depth=None):
    """Atoms (depth-``depth`` words) below the vertex v."""
    depth = t.depth if depth is None else depth
    if len(v) >= depth:
        return [v[:depth]]
    tails = [range(t.branching(i)) for i in range(len(v), depth)]
    return [v + tuple(w) for w in product(*tails)]


def half_tree_atoms(t: RegularTreeModel, a, b, depth=None):
    """Atoms whose rays enter the half-tree H(a -> b) (b adjacent to a)."""
    depth = t.depth if depth is None else depth
    if len(b) == len(a) + 1:
        return cylinder(t, b, depth)
    inside = set(cylinder(t, a, depth))
    return [w for w in t.level(depth) if w not in inside]


def random_ray(rng, t: RegularTreeModel, depth=None, periodic=False):
    depth = t.depth if depth is None else depth
    word = tuple(rng.randrange(t.branching(i)) for i in range(depth))
    if periodic:
        return BoundaryPoint(word, (rng.randrange(t.children),))
    return BoundaryPoint.truncated(word)
