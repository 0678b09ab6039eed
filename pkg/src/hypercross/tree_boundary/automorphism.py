"""Tree automorphisms given by a vertex rule, and their classification."""

from __future__ import annotations

from dataclasses import dataclass

from hypercross.errors import InvalidStructureError, ResolutionError
from hypercross.tree_boundary.rays import (
    BoundaryPoint,
    RegularTreeModel,
    vertex_distance,
    vertex_toward,
    word_lcp,
)


class TreeAutomorphism:
    """Base class: subclasses implement ``image(v)`` on vertex words.

    ``depth`` is the materialization depth: the radius of the ball on which
    the map is checked and scanned.
    """

    def __init__(self, model: RegularTreeModel, depth=None):
        self.model = model
        self.depth = model.depth if depth is None else depth

    def image(self, v):
        raise NotImplementedError

    def __call__(self, v):
        return self.image(tuple(v))

    def inverse(self):
        raise NotImplementedError

    def __mul__(self, other):
        return Composite(self, other)

    def power(self, n):
        if n == 0:
            return Identity(self.model, self.depth)
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = Composite(out, base)
        return out

    def ray_image(self, x: BoundaryPoint, n):
        """First n letters of g(x).

        For u on x at depth n + |g r|, the vertex g(u) lies past the point
        where [g r, g x) joins [r, g x), so its word is a prefix of g(x).
        """
        s = len(self.image(()))
        return self.image(x.word(n + s))[:n]

    def ray_point(self, x: BoundaryPoint, n):
        return BoundaryPoint.truncated(self.ray_image(x, n))

    def check_ball(self, radius=None):
        """Verify adjacency preservation and injectivity on the ball."""
        radius = self.depth if radius is None else radius
        seen = {}
        for v in self.model.ball(radius):
            gv = self.image(v)
            self.model.check_word(gv)
            if gv in seen:
                raise InvalidStructureError(f"{v} and {seen[gv]} have the same image")
            seen[gv] = v
            if v:
                if vertex_distance(gv, self.image(v[:-1])) != 1:
                    raise InvalidStructureError(f"edge {v[:-1]}-{v} not preserved")
        return True


class Identity(TreeAutomorphism):
    def image(self, v):
        return tuple(v)

    def inverse(self):
        return self


class Composite(TreeAutomorphism):
    """(f * g)(v) = f(g(v))."""

    def __init__(self, f, g):
        super().__init__(f.model, min(f.depth, g.depth))
        self.f, self.g = f, g

    def image(self, v):
        return self.f.image(self.g.image(v))

    def inverse(self):
        return Composite(self.g.inverse(), self.f.inverse())


class PortraitAutomorphism(TreeAutomorphism):
    """Root-fixing automorphism: ``portrait(v)`` is the permutation (a tuple)
    applied to the children of v; missing entries mean identity."""

    def __init__(self, model, portrait, depth=None):
        super().__init__(model, depth)
        self._portrait = portrait if callable(portrait) else (lambda v, d=dict(portrait): d.get(v))

    def image(self, v):
        out = []
        for i, a in enumerate(v):
            perm = self._portrait(tuple(v[:i]))
            out.append(perm[a] if perm is not None else a)
        return tuple(out)

    def inverse(self):
        def inv(w):
            # portrait of the inverse at g(v) is the inverse permutation at v
            v = self.preimage(w)
            perm = self._portrait(v)
            if perm is None:
                return None
            out = [0] * len(perm)
            for i, a in enumerate(perm):
                out[a] = i
            return tuple(out)

        return PortraitAutomorphism(self.model, inv, self.depth)

    def preimage(self, w):
        out = []
        for a in w:
            perm = self._portrait(tuple(out))
            out.append(perm.index(a) if perm is not None else a)
        return tuple(out)


def child_swap(model, vertex=()):
    """Swap the first two children of ``vertex``."""
    n = model.branching(len(vertex))
    perm = (1, 0) + tuple(range(2, n))
    return PortraitAutomorphism(model, {tuple(vertex): perm})


class AxisShift(TreeAutomorphism):
    """Translation by ``amount`` along the axis (2 0 0 ...) <-> (0 0 0 ...)
    of a tree whose root has 3 children and other vertices 2.

    A vertex is written (n, w): its nearest axis vertex a_n and the word w
    leaving the axis; the shift maps (n, w) to (n + amount, w).
    """

    def __init__(self, model, amount=1, depth=None):
        if (model.root_children, model.children) != (3, 2):
            raise InvalidStructureError("AxisShift is defined on the 3-regular tree")
        super().__init__(model, depth)
        self.amount = amount

    @staticmethod
    def axis_vertex(n):
        if n == 0:
            return ()
        if n > 0:
            return (0,) * n
        return (2,) + (0,) * (-n - 1)

    @staticmethod
    def decompose(v):
        if not v:
            return 0, ()
        if v[0] == 1:
            return 0, v
        run = 1
        while run < len(v) and v[run] == 0:
            run += 1
        n = run if v[0] == 0 else -run
        return n, v[run:]

    @classmethod
    def compose_vertex(cls, n, w):
        if not w:
            return cls.axis_vertex(n)
        if n == 0:
            return w
        return cls.axis_vertex(n) + w

    def image(self, v):
        n, w = self.decompose(tuple(v))
        return self.compose_vertex(n + self.amount, w)

    def inverse(self):
        return AxisShift(self.model, -self.amount, self.depth)

    def power(self, n):
        return AxisShift(self.model, self.amount * n, self.depth)

    def exact_ends(self):
        """(attracting, repelling) as periodic rays."""
        plus, minus = BoundaryPoint((), (0,)), BoundaryPoint((2,), (0,))
        if self.amount == 0:
            raise InvalidStructureError("zero shift has no attracting end")
        return (plus, minus) if self.amount > 0 else (minus, plus)

    def attracting_end(self):
        return self.exact_ends()[0]


@dataclass
class DynamicsClass:
    kind: str
    translation_length: int = 0
    attracting: BoundaryPoint | None = None
    repelling: BoundaryPoint | None = None
    fixed: tuple | None = None  # fixed vertex, or the flipped edge
    min_displacement: int | None = None
    criterion_edge: tuple | None = None

    def to_json(self):
        out = {"kind": self.kind, "translation_length": self.translation_length}
        if self.attracting is not None:
            out["attracting"] = list(self.attracting.prefix)
            out["repelling"] = list(self.repelling.prefix)
        if self.fixed is not None:
            out["fixed"] = [list(x) for x in self.fixed] if self.kind == "inversion" else list(self.fixed)
        return out


def _half_tree_contains(inner, outer):
    """H(inner) subset of H(outer) for directed edges (a -> b)."""
    a, b = outer
    a2, b2 = inner
    if vertex_distance(a, b2) != 1 + vertex_distance(b, b2):
        return False
    return vertex_distance(a2, a) < vertex_distance(b2, a)


def classify_automorphism(g: TreeAutomorphism, end_depth=None) -> DynamicsClass:
    """Elliptic, inversion or loxodromic.

    The kind comes from l = d(r, g^2 r) - d(r, g r): positive exactly for
    loxodromics, where it is the translation length.  A displacement scan
    over the materialized ball and the half-tree criterion g H(e) < H(e)
    for an axis edge e are cross-checks; a disagreement is an error.
    """
    if g.depth < 3:
        raise ResolutionError("materialize the automorphism to depth >= 3 to classify it")
    end_depth = g.depth if end_depth is None else end_depth
    r = ()
    gr = g.image(r)
    ggr = g.image(gr)
    d1 = vertex_distance(r, gr)
    ell = vertex_distance(r, ggr) - d1
    scan = min(vertex_distance(v, g.image(v)) for v in g.model.ball(min(g.depth, 6)))
    if ell <= 0:
        if d1 % 2 == 0:
            mid = vertex_toward(r, gr, d1 // 2)
            if g.image(mid) != mid:
                raise InvalidStructureError("midpoint of [r, gr] is not fixed; not an automorphism?")
            return DynamicsClass("elliptic", 0, fixed=mid, min_displacement=scan)
        a = vertex_toward(r, gr, d1 // 2)
        b = vertex_toward(r, gr, d1 // 2 + 1)
        if g.image(a) != b or g.image(b) != a:
            raise InvalidStructureError("middle edge of [r, gr] is not flipped")
        return DynamicsClass("inversion", 0, fixed=(a, b), min_displacement=scan)
    # loxodromic: the projection of r to the axis sits (d1 - ell)/2 along [r, gr]
    off = (d1 - ell) // 2
    v0 = vertex_toward(r, gr, off)
    v1 = vertex_toward(v0, g.image(v0), 1)
    edge = (v0, v1)
    gedge = (g.image(v0), g.image(v1))
    if not (_half_tree_contains(gedge, edge) and gedge != edge):
        raise InvalidStructureError("half-tree criterion failed on the computed axis")
    if scan < ell:
        raise InvalidStructureError("displacement scan found a vertex moved less than l")
    attracting = _end_from_orbit(g, v0, end_depth)
    repelling = _end_from_orbit(g.inverse(), v0, end_depth)
    return DynamicsClass("loxodromic", ell, attracting, repelling,
                         min_displacement=scan, criterion_edge=edge)


def _end_from_orbit(g, v0, depth):
    """Truncated end approached by g^i(v0) (v0 on the axis)."""
    v = v0
    prev = None
    for _ in range(4 * depth + 4 * len(v0) + 8):
        v = g.image(v)
        if len(v) >= depth:
            w = v[:depth]
            if w == prev:
                return BoundaryPoint.truncated(w)
            prev = w
    raise ResolutionError("orbit did not settle; increase the materialization depth")
