"""Finite quasimetric spaces, their crossratio, the quasimetric on distinct
triples, and k-geodesic search."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from hypercross.crossratio import CrossratioTable
from hypercross.errors import InvalidStructureError, UnknownNodeError
from hypercross.rational import INF, as_rational, fmt


def _matrix(points, values):
    """Normalize ``values`` (callable, dict of dicts, dict of pairs, or
    nested list indexed like ``points``) to a dict of dicts of Fractions."""
    points = list(points)
    out = {x: {} for x in points}
    for i, x in enumerate(points):
        for j, y in enumerate(points):
            if callable(values):
                v = values(x, y)
            elif isinstance(values, dict):
                if x in values and isinstance(values[x], dict):
                    v = values[x].get(y, 0 if x == y else None)
                else:
                    v = values.get((x, y), values.get((y, x), 0 if x == y else None))
            else:
                v = values[i][j]
            if v is None:
                raise InvalidStructureError(f"missing value rho({x}, {y})")
            out[x][y] = as_rational(v)
    return points, out


def qm_defect(m, points=None) -> Fraction:
    """Least k with rho(x,y) <= rho(x,z) + rho(z,y) + k for all x, y, z."""
    if points is None:
        points = list(m) if isinstance(m, dict) else list(range(len(m)))
    points, rho = _matrix(points, m)
    for x in points:
        if rho[x][x] != 0:
            raise InvalidStructureError(f"nonzero diagonal at {x!r}")
        for y in points:
            if rho[x][y] < 0:
                raise InvalidStructureError(f"negative value rho({x}, {y})")
            if rho[x][y] != rho[y][x]:
                raise InvalidStructureError(f"asymmetric at ({x}, {y})")
    k = Fraction(0)
    for x in points:
        rx = rho[x]
        for z in points:
            rz = rho[z]
            for y in points:
                k = max(k, rx[y] - rx[z] - rz[y])
    return k


class QuasimetricSpace:
    def __init__(self, points, values, defect=None):
        self.points, self._rho = _matrix(points, values)
        if defect is None:
            defect = qm_defect(self._rho, self.points)
        self.defect = as_rational(defect)

    def __repr__(self):
        return f"QuasimetricSpace({len(self.points)} points, k={fmt(self.defect)})"

    def __call__(self, x, y):
        return self.rho(x, y)

    def rho(self, x, y):
        try:
            return self._rho[x][y]
        except KeyError as exc:
            raise UnknownNodeError(f"unknown point {exc.args[0]!r}") from None

    def to_json(self):
        return {
            "points": [_label(p) for p in self.points],
            "rho": [[_label(x), _label(y), fmt(self._rho[x][y])]
                    for x, y in combinations(self.points, 2)],
            "defect": fmt(self.defect),
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        pairs = {(x, y): v for x, y, v in data["rho"]}
        return cls(data["points"], pairs)


def _label(p):
    return ",".join(map(str, p)) if isinstance(p, tuple) else str(p)


def qm_crossratio(rho, x, y, z, w) -> Fraction:
    """(xy|zw)_rho: half of (largest pair-sum) - (rho(x,y) + rho(z,w))."""
    if len({x, y, z, w}) < 4:
        return Fraction(0)
    s1 = rho(x, y) + rho(z, w)
    s2 = rho(x, z) + rho(y, w)
    s3 = rho(x, w) + rho(y, z)
    return (max(s1, s2, s3) - s1) / 2


def crossratio_from_qm(q: QuasimetricSpace) -> CrossratioTable:
    if len(q.points) < 4:
        raise InvalidStructureError("a crossratio table needs at least 4 points")
    return CrossratioTable.from_function(q.points, lambda x, y, z, w: qm_crossratio(q.rho, x, y, z, w))


def triple_rho(cr, X, Y):
    """rho(X, Y): max of (x_i x_j | y_m y_n) over the nine pairs of pairs.

    ``cr`` is any callable crossratio; pairs sharing a point contribute 0.
    """
    best = Fraction(0)
    for xi, xj in combinations(X, 2):
        for ym, yn in combinations(Y, 2):
            if {xi, xj} & {ym, yn}:
                continue
            v = cr(xi, xj, ym, yn)
            if v == INF:
                return INF
            if v > best:
                best = v
    return best


def rho_on_triples(tbl: CrossratioTable, triples=None, compute_defect=True) -> QuasimetricSpace:
    """The quasimetric on distinct triples, materialized over ``triples``
    (default: every 3-subset of the ground set)."""
    if len(tbl.ground) < 3:
        raise InvalidStructureError("need at least 3 points to form a triple")
    if triples is None:
        triples = list(combinations(tbl.ground, 3))
    triples = [tuple(t) for t in triples]
    for t in triples:
        if len(set(t)) != 3:
            raise InvalidStructureError(f"triple {t} has repeated points")
    vals = {}
    for i, X in enumerate(triples):
        for Y in triples[i:]:
            vals[(X, Y)] = Fraction(0) if set(X) == set(Y) else triple_rho(tbl, X, Y)
    return QuasimetricSpace(triples, vals, defect=None if compute_defect else 0)


@dataclass
class GeodesicSegment:
    points: list
    k: Fraction

    def __len__(self):
        return len(self.points)


def find_geodesic_segment(q: QuasimetricSpace, k, x, y):
    """Shortest x = x_0, ..., x_n = y of distinct points with
    |rho(x_i, x_j) - |i - j|| <= k for all i, j; ``None`` when none exists."""
    k = as_rational(k)
    q.rho(x, x)
    q.rho(y, y)
    if x == y:
        return GeodesicSegment([x], k)
    rho = q.rho
    total = rho(x, y)
    lo = max(1, _ceil(total - k))
    hi = _floor(total + k)
    hi = min(hi, len(q.points) - 1)
    others = [p for p in q.points if p not in (x, y)]
    for n in range(lo, hi + 1):
        def dfs(chain):
            i = len(chain)
            if i == n:
                return chain + [y]
            for u in others:
                if u in chain:
                    continue
                if abs(rho(u, y) - (n - i)) > k:
                    continue
                if any(abs(rho(c, u) - (i - j)) > k for j, c in enumerate(chain)):
                    continue
                found = dfs(chain + [u])
                if found:
                    return found
            return None

        if n == 1:
            return GeodesicSegment([x, y], k)
        found = dfs([x])
        if found:
            return GeodesicSegment(found, k)
    return None


def _ceil(q):
    q = Fraction(q)
    return -((-q.numerator) // q.denominator)


def _floor(q):
    q = Fraction(q)
    return q.numerator // q.denominator
