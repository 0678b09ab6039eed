"""p-adic scalars at capped relative precision, the projective line over
Q_p, Moebius maps, and the Bruhat-Tits tree action on ends."""

from __future__ import annotations

from fractions import Fraction

from hypercross.errors import InvalidStructureError, PrecisionError, ResolutionError
from hypercross.rational import INF
from hypercross.tree_boundary.automorphism import TreeAutomorphism
from hypercross.tree_boundary.rays import BoundaryPoint, RegularTreeModel, vertex_median


def valuation(n, p):
    """p-adic valuation of a nonzero integer or Fraction."""
    if isinstance(n, Fraction):
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicScalar:
    """u * p**val with u a unit known modulo p**prec.

    Exact zero has ``val = INF``.  A value known only to be divisible by
    p**n (all digits lost) is the inexact zero O(p**n): ``unit = 0``,
    ``prec = 0``, ``val = n``.
    """

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p, val, unit, prec):
        self.p = p
        self.val = val
        self.prec = prec
        self.unit = unit % p ** prec if prec > 0 else 0
        if prec > 0 and self.unit % p == 0:
            raise InvalidStructureError("unit part must be prime to p")

    @classmethod
    def from_rational(cls, q, p, prec):
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        v = valuation(q, p)
        u = q / Fraction(p) ** v
        m = p ** prec
        return cls(p, v, u.numerator * pow(u.denominator, -1, m) % m, prec)

    @classmethod
    def zero(cls, p):
        return cls(p, INF, 0, 0)

    @property
    def is_exact_zero(self):
        return self.val == INF

    def is_zero(self):
        return self.val == INF or self.prec == 0

    @property
    def absprec(self):
        return INF if self.val == INF else self.val + self.prec

    def __repr__(self):
        if self.val == INF:
            return "0"
        if self.prec == 0:
            return f"O({self.p}^{self.val})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.absprec})"

    def _like(self, val, unit, prec):
        return PadicScalar(self.p, val, unit, prec)

    def __neg__(self):
        if self.is_zero():
            return self
        return self._like(self.val, -self.unit, self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        if self.is_exact_zero:
            return other
        if other.is_exact_zero:
            return self
        absprec = min(self.absprec, other.absprec)
        v = min(self.val, other.val)
        if absprec <= v:
            return self._like(absprec, 0, 0)
        p = self.p
        m = p ** (absprec - v)
        s = (self._raw(v) + other._raw(v)) % m
        if s == 0:
            return self._like(absprec, 0, 0)
        k = 0
        while s % p == 0:
            s //= p
            k += 1
        return self._like(v + k, s, absprec - v - k)

    def _raw(self, v):
        """Integer approximant of self / p**v (needs self.val >= v)."""
        if self.prec == 0:
            return 0
        return self.unit * self.p ** (self.val - v)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    __radd__ = __add__

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_exact_zero or other.is_exact_zero:
            return PadicScalar.zero(self.p)
        v = self.val + other.val
        prec = min(self.prec, other.prec)
        if prec == 0:
            return self._like(v, 0, 0)
        return self._like(v, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_exact_zero:
            raise ZeroDivisionError("division by exact zero")
        if other.prec == 0:
            raise PrecisionError("division by a value with no significant digits")
        if self.is_exact_zero:
            return self
        v = self.val - other.val
        prec = min(self.prec, other.prec)
        if prec == 0:
            return self._like(v, 0, 0)
        m = self.p ** prec
        return self._like(v, self.unit * pow(other.unit, -1, m), prec)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise InvalidStructureError("mixing different primes")
            return other
        cap = self.prec if self.prec > 0 else 1
        return PadicScalar.from_rational(other, self.p, max(cap, 1) + 64)

    def equals(self, other):
        """Equality at the joint precision (difference has no known digits)."""
        return (self - self._coerce(other)).is_zero()

    def to_rational(self):
        """The exact rational whose expansion is the known digits followed by zeros."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def lift(self, prec):
        """Same known digits, padded with zeros to relative precision ``prec``."""
        if self.is_zero():
            return self if self.is_exact_zero else PadicScalar.zero(self.p)
        return self._like(self.val, self.unit, max(prec, self.prec))

    def digits(self, n):
        """The first n p-adic digits (positions 0..n-1); needs val >= 0."""
        if self.is_exact_zero:
            return [0] * n
        if self.val < 0:
            raise InvalidStructureError("digits need a p-adic integer")
        if self.absprec < n:
            raise PrecisionError(f"only {self.absprec} digits known, {n} requested")
        x = self._raw(0) if self.prec else 0
        out = []
        for _ in range(n):
            x, d = divmod(x, self.p)
            out.append(d)
        return out

    def to_json(self):
        q = self.to_rational()
        return {"num": str(q.numerator), "den": str(q.denominator),
                "val": None if self.val == INF else self.val}


class ProjPoint:
    """(u : v) normalized to (z : 1) with v(z) >= 0, or (1 : w) with v(w) > 0."""

    __slots__ = ("chart", "coord")

    def __init__(self, u, v):
        if u.is_zero() and v.is_zero():
            raise PrecisionError("point indistinguishable from (0:0)")
        # an inexact zero only bounds its valuation from below
        if (u.prec == 0 and not u.is_exact_zero and u.val < v.val) or \
                (v.prec == 0 and not v.is_exact_zero and v.val <= u.val):
            raise PrecisionError("chart of the point is undetermined at this precision")
        if u.is_zero():
            self.chart, self.coord = 0, u / v if not u.is_exact_zero else u
            return
        if v.is_zero() or v.val > u.val:
            self.chart, self.coord = 1, v / u
        else:
            self.chart, self.coord = 0, u / v

    @classmethod
    def from_rational(cls, q, p, prec):
        if q is None or q == INF:
            return cls.infinity(p, prec)
        return cls(PadicScalar.from_rational(q, p, prec), PadicScalar.from_rational(1, p, prec))

    @classmethod
    def infinity(cls, p, prec):
        return cls(PadicScalar.from_rational(1, p, prec), PadicScalar.zero(p))

    @property
    def p(self):
        return self.coord.p

    def homogeneous(self):
        one = PadicScalar.from_rational(1, self.p, max(self.coord.prec, 1) + 64)
        return (self.coord, one) if self.chart == 0 else (one, self.coord)

    def equals(self, other):
        return self.chart == other.chart and self.coord.equals(other.coord)

    def lift(self, prec):
        out = ProjPoint.__new__(ProjPoint)
        out.chart, out.coord = self.chart, self.coord.lift(prec)
        return out

    def is_infinity(self):
        return self.chart == 1 and self.coord.is_exact_zero

    def to_rational(self):
        """Affine coordinate as an exact Fraction, or None for infinity."""
        if self.chart == 0:
            return self.coord.to_rational()
        w = self.coord.to_rational()
        return None if w == 0 else 1 / w

    def __repr__(self):
        return f"({self.coord!r} : 1)" if self.chart == 0 else f"(1 : {self.coord!r})"

    def to_json(self):
        q = self.to_rational()
        if q is None:
            return {"num": "1", "den": "0", "val": None}
        return {"num": str(q.numerator), "den": str(q.denominator),
                "val": None if q == 0 else valuation(q, self.p)}


def _det(u1, v1, u2, v2):
    return u1 * v2 - u2 * v1


class Mobius:
    """z -> (a z + b) / (c z + d) over Q_p; equality is projective."""

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d
        if self.det().is_zero():
            raise PrecisionError("determinant vanishes at this precision")

    @classmethod
    def from_rationals(cls, entries, p, prec):
        return cls(*(PadicScalar.from_rational(e, p, prec) for e in entries))

    @property
    def p(self):
        return self.a.p

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def det(self):
        return self.a * self.d - self.b * self.c

    def __call__(self, x):
        return self.act(x)

    def act(self, x: ProjPoint):
        u, v = x.homogeneous()
        return ProjPoint(self.a * u + self.b * v, self.c * u + self.d * v)

    def __mul__(self, other):
        a, b, c, d = self.entries()
        e, f, g, h = other.entries()
        return Mobius(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def equals(self, other):
        mine, theirs = self.entries(), other.entries()
        # scale by the entry of least valuation in `other`
        i = min(range(4), key=lambda j: theirs[j].val if not theirs[j].is_zero() else INF)
        if theirs[i].is_zero():
            return False
        lam = mine[i] / theirs[i]
        return all((m - lam * t).is_zero() for m, t in zip(mine, theirs))

    def to_rationals(self):
        return tuple(e.to_rational() for e in self.entries())

    def lift(self, prec):
        return Mobius(*(e.lift(prec) for e in self.entries()))

    def __repr__(self):
        return f"Mobius({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


def mobius_act(m: Mobius, x: ProjPoint) -> ProjPoint:
    return m.act(x)


def solve_sharply3(p1: ProjPoint, p2: ProjPoint, p3: ProjPoint, check=True, working_precision=None) -> Mobius:
    """The Moebius map sending (0, 1, oo) to (p1, p2, p3).

    Built as [lam*P3 | mu*P1] with lam*P3 + mu*P1 = P2 (Cramer).  With
    ``check``, a second solution obtained by inverting the map that sends
    (p1, p2, p3) to (0, 1, oo) must agree projectively, and the three
    images are re-verified.  ``working_precision`` treats the inputs as
    exact (their known digits padded with zeros) at that precision.
    """
    if working_precision is not None:
        p1, p2, p3 = (q.lift(working_precision) for q in (p1, p2, p3))
    u1, v1 = p1.homogeneous()
    u2, v2 = p2.homogeneous()
    u3, v3 = p3.homogeneous()
    D = _det(u3, v3, u1, v1)
    d12 = _det(u1, v1, u2, v2)
    d23 = _det(u2, v2, u3, v3)
    if D.is_zero() or d12.is_zero() or d23.is_zero():
        raise PrecisionError("points coincide at this precision")
    lam = _det(u2, v2, u1, v1) / D
    mu = _det(u3, v3, u2, v2) / D
    g = Mobius(lam * u3, mu * u1, lam * v3, mu * v1)
    if check:
        # S(z) = [z,p1][p2,p3] / ([z,p3][p2,p1]) sends p1, p2, p3 to 0, 1, oo
        s = Mobius(d23 * v1, -(d23 * u1), -(d12 * v3), d12 * u3)
        if not s.inverse().equals(g):
            raise InvalidStructureError("second solution disagrees; not sharply 3-transitive?")
        zero = ProjPoint.from_rational(0, p1.p, 64)
        one = ProjPoint.from_rational(1, p1.p, 64)
        inf = ProjPoint.infinity(p1.p, 64)
        for src, dst in ((zero, p1), (one, p2), (inf, p3)):
            if not g.act(src).equals(dst):
                raise InvalidStructureError("solution does not hit the target triple")
    return g


def classical_crossratio_valuation(x1, x2, x3, x4) -> int:
    """v([13][24] / ([14][23])) with [ij] = u_i v_j - u_j v_i."""
    h = [x.homogeneous() for x in (x1, x2, x3, x4)]

    def br(i, j):
        (ui, vi), (uj, vj) = h[i - 1], h[j - 1]
        b = ui * vj - uj * vi
        if b.is_zero():
            raise PrecisionError(f"points {i} and {j} coincide at this precision")
        return b.val

    return br(1, 3) + br(2, 4) - br(1, 4) - br(2, 3)


# Bruhat-Tits tree


def _rational_digits(q: Fraction, p, n):
    """First n p-adic digits of a rational with nonnegative valuation."""
    if q == 0:
        return [0] * n
    m = p ** n
    x = q.numerator * pow(q.denominator, -1, m) % m
    out = []
    for _ in range(n):
        x, d = divmod(x, p)
        out.append(d)
    return out


def rational_end_word(z, p, n):
    """End-map word of length n for an exact point (Fraction or None = oo).

    z in Z_p gives its digit word; otherwise (1 : t) with t = 1/z in pZ_p
    gives [p] + digits(t / p).
    """
    if n == 0:
        return ()
    if z is not None and (z == 0 or valuation(z, p) >= 0):
        return tuple(_rational_digits(Fraction(z), p, n))
    t = Fraction(0) if z is None else 1 / Fraction(z)
    return (p,) + tuple(_rational_digits(t / p, p, n - 1))


def end_word(x: ProjPoint, n):
    """End-map word of a ProjPoint; raises if the precision is insufficient."""
    p = x.p
    if n == 0:
        return ()
    if x.chart == 0:
        return tuple(x.coord.digits(n))
    if n > 1 and not x.coord.is_exact_zero and x.coord.absprec < n:
        raise PrecisionError(f"point known to {x.coord.absprec} digits, depth {n} requested")
    return (p,) + tuple((x.coord / p).digits(n - 1)) if n > 1 else (p,)


def end_map(x: ProjPoint, depth) -> BoundaryPoint:
    return BoundaryPoint.truncated(end_word(x, depth))


def _periodic_digits(q: Fraction, p):
    """Eventually periodic digit expansion (prefix, period) of a rational
    with nonnegative valuation."""
    seen = {}
    digits = []
    x = q
    while x not in seen:
        seen[x] = len(digits)
        d = x.numerator * pow(x.denominator, -1, p) % p
        digits.append(d)
        x = (x - d) / p
    k = seen[x]
    return digits[:k], digits[k:]


def rational_boundary_point(z, p) -> BoundaryPoint:
    """Exact end of a rational point (None = oo) as a periodic ray."""
    if z is not None and (z == 0 or valuation(z, p) >= 0):
        pre, per = _periodic_digits(Fraction(z), p)
        return BoundaryPoint(pre, per)
    t = Fraction(0) if z is None else 1 / Fraction(z)
    pre, per = _periodic_digits(t / p, p)
    return BoundaryPoint([p] + pre, per)


def _rational_sqrt(q: Fraction):
    from math import isqrt

    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def word_point(word, p):
    """Exact rational (or None = oo) whose end word extends ``word`` by zeros."""
    word = tuple(word)
    if not word:
        return Fraction(0)
    if word[0] < p:
        return Fraction(sum(a * p ** i for i, a in enumerate(word)))
    s = sum(a * p ** i for i, a in enumerate(word[1:]))
    t = Fraction(p * s)
    return None if t == 0 else 1 / t


def _branch_ends(v, p):
    """Three exact points whose ends leave v in three distinct directions."""
    if not v:
        return [Fraction(0), Fraction(1), None]
    n = len(v)
    kids = [word_point(v + (c,), p) for c in (0, 1)]
    if n == 1:
        other = None if v[0] < p else Fraction(0)
    else:
        w = list(v)
        w[-1] = (w[-1] + 1) % p
        other = word_point(tuple(w), p)
    return kids + [other]


class MobiusAutomorphism(TreeAutomorphism):
    """Action of a Moebius map on the Bruhat-Tits tree.

    Entries are taken as exact rationals (the known digits, padded with
    zeros).  A vertex v goes to the median of the images of three ends that
    leave v in distinct directions.
    """

    def __init__(self, m, model=None, depth=None):
        if isinstance(m, Mobius):
            p = m.p
            entries = m.to_rationals()
        else:
            entries, p = m
            entries = tuple(Fraction(e) for e in entries)
        model = model or RegularTreeModel.bruhat_tits(p)
        if (model.root_children, model.children) != (p + 1, p):
            raise InvalidStructureError("model is not the Bruhat-Tits tree of this prime")
        super().__init__(model, depth)
        a, b, c, d = entries
        if a * d - b * c == 0:
            raise InvalidStructureError("singular matrix")
        self.p = p
        self.entries = (a, b, c, d)
        self._cache = {}

    def point_image(self, z):
        a, b, c, d = self.entries
        if z is None:
            return None if c == 0 else a / c
        den = c * z + d
        if den == 0:
            return None
        return (a * z + b) / den

    def image(self, v):
        v = tuple(v)
        hit = self._cache.get(v)
        if hit is not None:
            return hit
        imgs = [self.point_image(z) for z in _branch_ends(v, self.p)]
        n = len(v) + 8
        while True:
            words = [rational_end_word(z, self.p, n) for z in imgs]
            med = vertex_median(*words)
            if len(med) < n:
                break
            n *= 2
        self._cache[v] = med
        return med

    def inverse(self):
        a, b, c, d = self.entries
        return MobiusAutomorphism(((d, -b, -c, a), self.p), self.model, self.depth)

    def compose(self, other):
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return MobiusAutomorphism(((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h), self.p),
                                  self.model, self.depth)

    def power(self, n):
        if n == 0:
            return MobiusAutomorphism(((1, 0, 0, 1), self.p), self.model, self.depth)
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out.compose(base)
        return out

    def fixed_points(self):
        """Rational fixed points (None = oo); raises when they are irrational."""
        a, b, c, d = self.entries
        if c == 0:
            pts = [None] + ([b / (d - a)] if d != a else [])
            return pts
        disc = _rational_sqrt((d - a) ** 2 + 4 * b * c)
        if disc is None:
            raise ResolutionError("fixed points are not rational")
        roots = {(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)}
        return sorted(roots)

    def exact_ends(self):
        """(attracting, repelling) periodic rays of a loxodromic with rational
        fixed points."""
        from hypercross.tree_boundary.automorphism import classify_automorphism

        pts = self.fixed_points()
        if len(pts) != 2:
            raise InvalidStructureError("not loxodromic: fewer than two fixed points")
        cls = classify_automorphism(self)
        if cls.kind != "loxodromic":
            raise InvalidStructureError(f"{cls.kind} element has no attracting end")
        ends = [rational_boundary_point(z, self.p) for z in pts]
        n = len(cls.attracting.prefix)
        if ends[0].word(n) == cls.attracting.prefix:
            return ends[0], ends[1]
        return ends[1], ends[0]

    def trace_valuation_ratio(self):
        """v(tr^2 / det): negative exactly for loxodromics, where -v is the
        translation length."""
        a, b, c, d = self.entries
        tr = a + d
        if tr == 0:
            return INF
        return 2 * valuation(tr, self.p) - valuation(a * d - b * c, self.p)


def bt_correspondence(p, depth, precision=None):
    """The (p+1)-regular tree to ``depth`` and the end map at that depth."""
    if precision is not None and depth > precision:
        raise ResolutionError(f"depth {depth} exceeds precision {precision}")
    model = RegularTreeModel.bruhat_tits(p, depth)

    def emap(x):
        return end_map(x, depth)

    return model, emap


def mobius_automorphism(m: Mobius, depth=8):
    return MobiusAutomorphism(m, RegularTreeModel.bruhat_tits(m.p, depth))


def random_point(rng, p, prec, max_val=3):
    """Random ProjPoint: infinity occasionally, else u * p**v with v in
    [-max_val, max_val] and a random unit."""
    if rng.random() < 0.05:
        return ProjPoint.infinity(p, prec)
    if rng.random() < 0.05:
        return ProjPoint.from_rational(0, p, prec)
    v = rng.randint(-max_val, max_val)
    m = p ** prec
    u = rng.randrange(1, m)
    while u % p == 0:
        u = rng.randrange(1, m)
    return ProjPoint(PadicScalar(p, v, u, prec), PadicScalar.from_rational(1, p, prec))


def random_loxodromic(rng, p, size=12, depth=8):
    """Random integer matrix acting loxodromically (v(tr^2/det) < 0)."""
    while True:
        a, b, c, d = (rng.randint(-size, size) for _ in range(4))
        if a * d - b * c == 0:
            continue
        g = MobiusAutomorphism(((a, b, c, d), p), RegularTreeModel.bruhat_tits(p, depth))
        if g.trace_valuation_ratio() < 0:
            return g
