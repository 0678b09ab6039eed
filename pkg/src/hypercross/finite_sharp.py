"""Finite sharply k-transitive actions: permutation groups by closure,
finite fields, the order-9 Dickson near-field, affine groups and PGL2(F_q)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from hypercross import kernels
from hypercross.errors import InvalidStructureError, TooLargeError

ELEMENT_CAP = 10 ** 6


def compose(f, g):
    """(f g)(x) = f(g(x)) on tuples."""
    return tuple(f[i] for i in g)


def invert(f):
    out = [0] * len(f)
    for i, j in enumerate(f):
        out[j] = i
    return tuple(out)


class FinitePermGroup:
    def __init__(self, n, generators, cap=ELEMENT_CAP):
        self.n = n
        self.generators = [tuple(g) for g in generators]
        for g in self.generators:
            if sorted(g) != list(range(n)):
                raise InvalidStructureError(f"{g} is not a permutation of {n} points")
        self.cap = cap
        self._elements = None

    def elements(self):
        if self._elements is None:
            ident = tuple(range(self.n))
            seen = {ident}
            frontier = [ident]
            while frontier:
                nxt = []
                for h in frontier:
                    for g in self.generators:
                        e = compose(g, h)
                        if e not in seen:
                            seen.add(e)
                            if len(seen) > self.cap:
                                raise TooLargeError(f"group exceeds {self.cap} elements")
                            nxt.append(e)
                frontier = nxt
            self._elements = sorted(seen)
        return self._elements

    def order(self):
        return len(self.elements())

    def to_json(self):
        return {"n": self.n, "generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["n"], data["generators"])


def symmetric_group(n):
    if n < 2:
        return FinitePermGroup(n, [])
    cycle = tuple(range(1, n)) + (0,)
    swap = (1, 0) + tuple(range(2, n))
    return FinitePermGroup(n, [cycle, swap])


def alternating_group(n):
    gens = []
    for i in range(n - 2):
        g = list(range(n))
        g[i], g[i + 1], g[i + 2] = g[i + 1], g[i + 2], g[i]
        gens.append(tuple(g))
    return FinitePermGroup(n, gens)


@dataclass
class SharpnessCertificate:
    sharp: bool
    k: int
    order: int
    tuple_count: int
    orbit_size: int
    violation: tuple | None = None  # (kind, witness)

    def to_json(self):
        out = {"sharp": self.sharp, "k": self.k, "order": self.order,
               "tuple_count": self.tuple_count, "orbit_size": self.orbit_size}
        if self.violation is not None:
            kind, wit = self.violation
            out["violation"] = {"kind": kind, "witness": [list(w) if isinstance(w, tuple) else w for w in wit]}
        return out


def verify_sharp_transitive(g: FinitePermGroup, k) -> SharpnessCertificate:
    """Free and transitive on distinct k-tuples.

    Transitive: the orbit of (0, ..., k-1) has n(n-1)...(n-k+1) tuples.
    Free: no non-identity element fixes k points.
    """
    n = g.n
    if k < 1 or n < k:
        raise InvalidStructureError(f"need 1 <= k <= n, got k={k}, n={n}")
    elems = g.elements()
    count = 1
    for i in range(k):
        count *= n - i
    base = tuple(range(k))
    orbit = {tuple(e[i] for i in base) for e in elems}
    perms = np.array(elems, dtype=np.int64).reshape(len(elems), n)
    fixed = kernels.fixed_point_counts(perms)
    violation = None
    ident = tuple(range(n))
    for e, f in zip(elems, fixed):
        if f >= k and e != ident:
            pts = tuple(i for i in range(n) if e[i] == i)[:k]
            violation = ("not free", (e, pts))
            break
    if violation is None and len(orbit) != count:
        missing = next(t for t in permutations(range(n), k) if t not in orbit)
        violation = ("not transitive", (base, missing))
    return SharpnessCertificate(violation is None, k, len(elems), count, len(orbit), violation)


# finite fields

IRREDUCIBLE = {4: (2, [1, 1, 1]), 8: (2, [1, 1, 0, 1]), 9: (3, [1, 0, 1]), 16: (2, [1, 1, 0, 0, 1])}


class GF:
    """F_q with elements 0..q-1 read as base-p coefficient vectors (low
    degree first) modulo a fixed irreducible polynomial."""

    def __init__(self, q):
        if q in IRREDUCIBLE:
            p, poly = IRREDUCIBLE[q]
        elif q >= 2 and all(q % d for d in range(2, int(q ** 0.5) + 1)):
            p, poly = q, [0, 1]
        else:
            raise InvalidStructureError(f"unsupported field order {q}")
        self.q, self.p, self.poly = q, p, poly
        self.m = len(poly) - 1
        self.add = np.array([[self._add(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
        self.mul = np.array([[self._mul(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
        self.neg = [int(np.where(self.add[a] == 0)[0][0]) for a in range(q)]
        self.inv = [None] + [int(np.where(self.mul[a] == 1)[0][0]) for a in range(1, q)]
        self.primitive = next(a for a in range(2, q) if self._order(a) == q - 1) if q > 2 else 1

    def _vec(self, a):
        return [(a // self.p ** i) % self.p for i in range(self.m)]

    def _int(self, v):
        return sum(c * self.p ** i for i, c in enumerate(v))

    def _add(self, a, b):
        return self._int([(x + y) % self.p for x, y in zip(self._vec(a), self._vec(b))])

    def _mul(self, a, b):
        va, vb = self._vec(a), self._vec(b)
        prod = [0] * (2 * self.m - 1)
        for i, x in enumerate(va):
            for j, y in enumerate(vb):
                prod[i + j] = (prod[i + j] + x * y) % self.p
        lead = self.poly[-1]
        for d in range(len(prod) - 1, self.m - 1, -1):
            c = prod[d] * pow(lead, -1, self.p) % self.p
            if c:
                for i, pc in enumerate(self.poly):
                    prod[d - self.m + i] = (prod[d - self.m + i] - c * pc) % self.p
        return self._int(prod[:self.m])

    def _order(self, a):
        x, k = a, 1
        while x != 1:
            x = self._mul(x, a)
            k += 1
        return k


# near-fields


class NearField:
    """Elements 0..q-1 with 0 additive and 1 multiplicative identity."""

    def __init__(self, q, add, mul):
        self.q = q
        self.add = np.asarray(add, dtype=np.int64)
        self.mul = np.asarray(mul, dtype=np.int64)
        self.left_distributivity_witness = None

    def verify(self):
        """Check the near-field axioms exhaustively; records a left
        distributivity failure if there is one."""
        q, A, M = self.q, self.add, self.mul
        R = range(q)
        if any(A[0, x] != x for x in R):
            raise InvalidStructureError("0 is not an additive identity")
        if not (A == A.T).all():
            raise InvalidStructureError("addition is not commutative")
        for x, y, z in product(R, R, R):
            if A[A[x, y], z] != A[x, A[y, z]]:
                raise InvalidStructureError(f"addition not associative at {(x, y, z)}")
        if any(0 not in A[x] for x in R):
            raise InvalidStructureError("missing additive inverse")
        nz = range(1, q)
        for x in nz:
            if M[1, x] != x or M[x, 1] != x:
                raise InvalidStructureError("1 is not a multiplicative identity")
            if sorted(M[x, 1:]) != list(nz):
                raise InvalidStructureError(f"left multiplication by {x} is not a bijection of the units")
        for x, y, z in product(nz, nz, nz):
            if M[M[x, y], z] != M[x, M[y, z]]:
                raise InvalidStructureError(f"multiplication not associative at {(x, y, z)}")
        for x, y, z in product(R, R, R):
            if M[A[x, y], z] != A[M[x, z], M[y, z]]:
                raise InvalidStructureError(f"right distributivity fails at {(x, y, z)}")
        self.left_distributivity_witness = None
        for x, y, z in product(R, R, R):
            if M[z, A[x, y]] != A[M[z, x], M[z, y]]:
                self.left_distributivity_witness = (z, x, y)
                break
        return True

    def unit_group(self):
        """Multiplicative group as permutations of the units 1..q-1."""
        return [tuple(int(self.mul[x, y]) - 1 for y in range(1, self.q)) for x in range(1, self.q)]

    def unit_order(self, x):
        y, k = x, 1
        while y != 1:
            y = int(self.mul[y, x])
            k += 1
        return k

    def is_commutative(self):
        return bool((self.mul == self.mul.T).all())


def field_near_field(q):
    F = GF(q)
    nf = NearField(q, F.add, F.mul)
    nf.verify()
    return nf


def dickson_near_field(q=9):
    """x o y = x y when y is a square in F_9, else x^3 y."""
    if q != 9:
        raise InvalidStructureError("only the order-9 Dickson near-field is supported")
    F = GF(9)
    squares = {int(F.mul[a, a]) for a in range(1, 9)}
    mul = np.zeros((9, 9), dtype=np.int64)
    for x in range(9):
        cube = int(F.mul[F.mul[x, x], x])
        for y in range(9):
            mul[x, y] = F.mul[x, y] if (y == 0 or y in squares) else F.mul[cube, y]
    nf = NearField(9, F.add, mul)
    nf.verify()
    return nf


def affine_group(nf: NearField, multipliers=None):
    """{x -> x o a + b : a in multipliers (default all units), b in nf}."""
    q = nf.q
    mults = range(1, q) if multipliers is None else multipliers
    gens = []
    for a in mults:
        for b in range(q):
            gens.append(tuple(int(nf.add[nf.mul[x, a], b]) for x in range(q)))
    return FinitePermGroup(q, gens)


SUPPORTED_Q = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)


def pgl2_fq_action(q):
    """PGL2(F_q) on the q + 1 points of P^1(F_q); point q is infinity.

    Generated by the translations z -> z + b, z -> g z for a primitive g,
    and z -> 1/z.
    """
    if q not in SUPPORTED_Q:
        raise InvalidStructureError(f"unsupported q={q}")
    F = GF(q)
    inf = q
    gens = []
    for b in range(1, q):
        gens.append(tuple(int(F.add[z, b]) for z in range(q)) + (inf,))
    g = F.primitive
    gens.append(tuple(int(F.mul[g, z]) for z in range(q)) + (inf,))
    gens.append(tuple(inf if z == 0 else F.inv[z] for z in range(q)) + (0,))
    return FinitePermGroup(q + 1, gens)
