"""Crossratio tables: hyperbolicity certificates, path chains, the
quasi-ultrametric of the crossratio topology, and approximating trees."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations

import numpy as np

from hypercross import kernels
from hypercross.errors import (
    InvalidStructureError,
    MissingEntryError,
    TooLargeError,
    UnknownNodeError,
)
from hypercross.metric_tree import MetricTree, tree_crossratio
from hypercross.rational import INF, as_rational, common_denominator, fmt, parse


class CrossratioTable:
    """Symmetric value table (xy|zw) on a finite ground set.

    Keys are normalized so that (xy|zw) = (yx|zw) = (zw|xy).  Only entries
    with four distinct arguments are stored; entries whose two pairs share a
    point read as 0 by convention.  ``INF`` is allowed as a value.
    """

    def __init__(self, ground, entries=None):
        self.ground = tuple(ground)
        if len(set(self.ground)) != len(self.ground):
            raise InvalidStructureError("ground set labels must be unique")
        self._index = {g: i for i, g in enumerate(self.ground)}
        self._values = {}
        for x, y, z, w, v in entries or ():
            self._set(x, y, z, w, v)

    def __repr__(self):
        return f"CrossratioTable({len(self.ground)} points, {len(self._values)} entries)"

    def _key(self, x, y, z, w):
        try:
            a, b, c, d = (self._index[t] for t in (x, y, z, w))
        except KeyError as exc:
            raise UnknownNodeError(f"{exc.args[0]!r} not in ground set") from None
        p = (a, b) if a < b else (b, a)
        q = (c, d) if c < d else (d, c)
        return (p, q) if p < q else (q, p)

    def _set(self, x, y, z, w, v):
        if len({x, y, z, w}) != 4:
            raise InvalidStructureError(f"entry ({x}{y}|{z}{w}) needs four distinct points")
        v = v if v == INF else as_rational(v)
        if v < 0:
            raise InvalidStructureError(f"negative crossratio ({x}{y}|{z}{w}) = {fmt(v)}")
        key = self._key(x, y, z, w)
        old = self._values.get(key)
        if old is not None and old != v:
            raise InvalidStructureError(f"conflicting values for ({x}{y}|{z}{w})")
        self._values[key] = v

    def __call__(self, x, y, z, w):
        return self.get(x, y, z, w)

    def get(self, x, y, z, w):
        key = self._key(x, y, z, w)
        if len({x, y, z, w}) < 4:
            return Fraction(0)
        try:
            return self._values[key]
        except KeyError:
            raise MissingEntryError(f"missing entry ({x}{y}|{z}{w})") from None

    def items(self):
        for ((a, b), (c, d)), v in sorted(self._values.items()):
            g = self.ground
            yield g[a], g[b], g[c], g[d], v

    def is_total(self):
        return len(self._values) == 3 * _choose(len(self.ground), 4)

    def max_value(self):
        finite = [v for v in self._values.values() if v != INF]
        return max(finite, default=Fraction(0))

    @classmethod
    def from_function(cls, ground, f):
        ground = tuple(ground)
        entries = []
        for a, b, c, d in combinations(ground, 4):
            for x, y, z, w in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
                entries.append((x, y, z, w, f(x, y, z, w)))
        return cls(ground, entries)

    def to_json(self):
        return {
            "ground": [str(g) for g in self.ground],
            "entries": [[str(x), str(y), str(z), str(w), fmt(v)] for x, y, z, w, v in self.items()],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        ground = data["ground"]
        entries = []
        for pos, row in enumerate(data["entries"]):
            if len(row) != 5:
                raise InvalidStructureError(f"entries[{pos}]: expected [x, y, z, w, value]")
            x, y, z, w, v = row
            entries.append((x, y, z, w, parse(str(v))))
        return cls(ground, entries)


def _choose(n, k):
    from math import comb
    return comb(n, k)


def table_from_tree(t: MetricTree, labels=None) -> CrossratioTable:
    labels = t.leaves if labels is None else labels
    return CrossratioTable.from_function(labels, lambda x, y, z, w: tree_crossratio(t, x, y, z, w))


# hyperbolicity


@dataclass
class HyperbolicityCertificate:
    k: Fraction
    witnesses4: dict = field(default_factory=dict)
    witnesses5: dict = field(default_factory=dict)
    violation: tuple | None = None
    excluded: list = field(default_factory=list)

    def to_json(self):
        out = {
            "k": fmt(self.k),
            "subsets4": len(self.witnesses4),
            "subsets5": len(self.witnesses5),
            "excluded": [list(map(str, s)) for s in self.excluded],
        }
        if self.violation is not None:
            subset, labeling, cost = self.violation
            out["violation"] = {"subset": list(map(str, subset)),
                                "labeling": list(map(str, labeling)), "cost": fmt(cost)}
        return out


def _dense(tbl: CrossratioTable):
    """Integer-scaled dense array of the table and the scale factor.

    Tuples with an infinite value get -1 and are excluded by the caller.
    """
    n = len(tbl.ground)
    den = common_denominator(v for *_, v in tbl.items())
    V = np.zeros((n, n, n, n), dtype=np.int64)
    for ((a, b), (c, d)), v in tbl._values.items():
        iv = -1 if v == INF else int(v * den)
        for p, q in ((a, b), (b, a)):
            for r, s in ((c, d), (d, c)):
                V[p, q, r, s] = iv
                V[r, s, p, q] = iv
    return V, den


def hyperbolicity_constant(tbl: CrossratioTable, bound=None) -> HyperbolicityCertificate:
    """Least k for which the 4- and 5-point tree axioms hold up to k.

    Exhaustive over the 3 labelings of every 4-subset and the 120 of every
    5-subset.  Subsets touching an infinite value are listed in
    ``excluded`` and skipped.  With ``bound`` set, the first subset whose
    cost exceeds it is reported as ``violation``.
    """
    n = len(tbl.ground)
    if n < 4:
        raise InvalidStructureError("hyperbolicity needs at least 4 points")
    if not tbl.is_total():
        missing = next((q for q in combinations(tbl.ground, 4) if not _has_all(tbl, q)), None)
        raise MissingEntryError(f"table incomplete, e.g. subset {missing}")
    V, den = _dense(tbl)
    inf_mask = V < 0
    s4 = kernels.all_subsets(n, 4)
    s5 = kernels.all_subsets(n, 5) if n >= 5 else np.zeros((0, 5), dtype=np.int64)
    excluded = []
    if inf_mask.any():
        bad = {tuple(sorted(ix)) for ix in zip(*np.nonzero(inf_mask))}
        bad4 = {tuple(sorted(set(b))) for b in bad}

        def clean(rows):
            keep = []
            for r in rows:
                if any(set(b) <= set(r) for b in bad4):
                    excluded.append(tuple(tbl.ground[i] for i in r))
                else:
                    keep.append(r)
            return np.array(keep, dtype=np.int64).reshape(-1, rows.shape[1])

        s4, s5 = clean(s4), clean(s5)
    c4, l4, c5, l5 = kernels.hyperbolicity_costs(V, s4, s5)
    g = tbl.ground
    w4 = {}
    pairing_orders = ((0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2))
    for row, lab in zip(s4.tolist(), l4.tolist()):
        w4[tuple(g[i] for i in row)] = tuple(g[row[i]] for i in pairing_orders[lab])
    w5 = {}
    for row, lab in zip(s5.tolist(), l5.tolist()):
        w5[tuple(g[i] for i in row)] = tuple(g[row[i]] for i in kernels.LABELING_ORDERS5[lab])
    worst = max(int(c4.max()) if len(c4) else 0, int(c5.max()) if len(c5) else 0)
    k = Fraction(worst, den)
    violation = None
    if bound is not None and k > as_rational(bound):
        limit = as_rational(bound) * den
        for rows, costs, wit in ((s4, c4, w4), (s5, c5, w5)):
            hit = np.nonzero(costs > limit)[0]
            if len(hit):
                r = rows[hit[0]].tolist()
                subset = tuple(g[i] for i in r)
                violation = (subset, wit[subset], Fraction(int(costs[hit[0]]), den))
                break
    return HyperbolicityCertificate(k, w4, w5, violation, excluded)


def _has_all(tbl, quad):
    a, b, c, d = quad
    try:
        for x, y, z, w in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
            tbl.get(x, y, z, w)
    except MissingEntryError:
        return False
    return True


# path property


def check_path_property(tbl: CrossratioTable, p):
    """Check the path property with tolerance ``p``.

    For every ordered distinct (x, y, z, w) search, exhaustively, for a chain
    y = u_0, ..., u_n = w of distinct points of ground - {x, z} with
    |(x u_i | z u_j) - (j - i)| <= p for all 0 <= i < j <= n.

    Returns ``(ok, witnesses)``: witnesses maps each 4-tuple to its chain
    (``None`` for the first failing tuple, after which the scan stops).
    """
    p = as_rational(p)
    ground = tbl.ground
    witnesses = {}
    for x, y, z, w in permutations(ground, 4):
        pool = [u for u in ground if u not in (x, z, y, w)]
        chain = _find_chain(tbl, x, z, y, w, pool, p)
        witnesses[(x, y, z, w)] = chain
        if chain is None:
            return False, witnesses
    return True, witnesses


def _find_chain(tbl, x, z, y, w, pool, p):
    def fits(chain, u):
        j = len(chain)
        for i, ui in enumerate(chain):
            v = tbl.get(x, ui, z, u)
            if v == INF or abs(v - (j - i)) > p:
                return False
        return True

    def dfs(chain, left):
        if fits(chain, w):
            return chain + [w]
        for idx, u in enumerate(left):
            if fits(chain, u):
                found = dfs(chain + [u], left[:idx] + left[idx + 1:])
                if found:
                    return found
        return None

    return dfs([y], pool)


# crossratio topology


def quasi_ultrametric_matrix(tbl: CrossratioTable, a, b, lam):
    """Entries lam^-(ab|xy) over ground - {a, b}, 0 on the diagonal.

    Entries are exact Fractions when the exponent is an integer; otherwise a
    float (the value is irrational).  Returns ``(points, matrix)`` with the
    matrix as a dict of dicts.
    """
    if a == b:
        raise InvalidStructureError("base points a and b must differ")
    lam = as_rational(lam)
    if lam <= 1:
        raise InvalidStructureError("lambda must exceed 1")
    pts = [x for x in tbl.ground if x not in (a, b)]
    out = {}
    for x in pts:
        out[x] = {}
        for y in pts:
            if x == y:
                out[x][y] = Fraction(0)
                continue
            e = tbl.get(a, b, x, y)
            if e == INF:
                out[x][y] = Fraction(0)
            elif e.denominator == 1:
                out[x][y] = Fraction(1) / lam ** int(e)
            else:
                out[x][y] = float(lam) ** (-float(e))
    return pts, out


def cr_ball(tbl: CrossratioTable, a, b, x, r):
    """D_ab(x, r) = {x} together with every y having (ab|xy) >= r."""
    if len({a, b, x}) != 3:
        raise InvalidStructureError("a, b, x must be distinct")
    r = as_rational(r)
    out = {x}
    for y in tbl.ground:
        if y in (a, b, x):
            continue
        if tbl.get(a, b, x, y) >= r:
            out.add(y)
    return out


# approximating trees


@dataclass
class TreeEmbedding:
    tree: MetricTree
    mapping: dict
    deviation: Fraction

    def to_json(self):
        return {"tree": self.tree.to_json(),
                "mapping": {str(k): str(v) for k, v in self.mapping.items()},
                "deviation": fmt(self.deviation)}


def _binary_topologies(n):
    """Unrooted binary trees on leaves 0..n-1 (n >= 3) by stepwise insertion.

    Each tree is an edge list over leaf ids 0..n-1 and internal ids >= n.
    """
    def grow(edges, k, next_internal):
        if k == n:
            yield edges
            return
        for i in range(len(edges)):
            u, v = edges[i]
            h = next_internal
            new = edges[:i] + edges[i + 1:] + [(u, h), (h, v), (h, k)]
            yield from grow(new, k + 1, next_internal + 1)

    yield from grow([(0, n), (1, n), (2, n)], 3, n + 1)


def _splits(edges, n):
    """For each internal edge, the side containing leaf 0 as a frozenset."""
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    out = []
    for u, v in edges:
        if u < n or v < n:
            continue
        seen = {u}
        stack = [u]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in seen and not (a == u and b == v):
                    seen.add(b)
                    stack.append(b)
        side = frozenset(i for i in seen if i < n)
        if 0 not in side:
            side = frozenset(range(n)) - side
        out.append(((u, v), side))
    return out


def fit_tree(tbl: CrossratioTable, max_points=8) -> TreeEmbedding:
    """Best sup-norm tree fit over all binary shapes (zero lengths contract).

    Each shape is solved as a Chebyshev linear program in floating point,
    then snapped to rationals and scored exactly; the reported deviation is
    the exact max |(xy|zw) - (xy|zw)_tree| of the returned tree.
    """
    from scipy.optimize import linprog

    ground = tbl.ground
    n = len(ground)
    if n > max_points:
        raise TooLargeError(f"fit_tree is exhaustive; {n} points exceeds {max_points}")
    if n < 4:
        tree = MetricTree([(g, "c", 1) for g in ground] if n > 1 else [], nodes=None if n > 1 else list(ground))
        return TreeEmbedding(tree, {g: g for g in ground}, Fraction(0))
    if not tbl.is_total():
        raise MissingEntryError("fit_tree needs a total table")
    rows = []  # (quartet as leaf ids, pair split (S, T), target value)
    for a, b, c, d in combinations(range(n), 4):
        for p, q, r, s in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
            v = tbl.get(ground[p], ground[q], ground[r], ground[s])
            if v == INF:
                raise InvalidStructureError("fit_tree needs finite values")
            rows.append(((p, q), (r, s), v))
    targets = [float(v) for _, _, v in rows]
    best = None
    for edges in _binary_topologies(n):
        splits = _splits(edges, n)
        m = len(splits)
        # incidence: internal edge separates {p,q} from {r,s}
        inc = np.zeros((len(rows), m))
        for i, (pq, rs, _) in enumerate(rows):
            for j, (_, side) in enumerate(splits):
                if (pq[0] in side) == (pq[1] in side) and (rs[0] in side) == (rs[1] in side) \
                        and (pq[0] in side) != (rs[0] in side):
                    inc[i, j] = 1.0
        tcol = -np.ones((len(rows), 1))
        A = np.vstack([np.hstack([inc, tcol]), np.hstack([-inc, tcol])])
        rhs = np.concatenate([targets, [-t for t in targets]])
        cost = np.zeros(m + 1)
        cost[-1] = 1.0
        res = linprog(cost, A_ub=A, b_ub=rhs, bounds=[(0, None)] * (m + 1), method="highs")
        if not res.success:
            continue
        lengths = [max(Fraction(0), Fraction(x).limit_denominator(10 ** 6)) for x in res.x[:m]]
        dev = Fraction(0)
        for i, (_, _, v) in enumerate(rows):
            fitted = sum((lengths[j] for j in range(m) if inc[i, j]), Fraction(0))
            dev = max(dev, abs(v - fitted))
            if best is not None and dev >= best[0]:
                break
        if best is None or dev < best[0]:
            best = (dev, edges, splits, lengths)
            if dev == 0:
                break
    dev, edges, splits, lengths = best
    return TreeEmbedding(_realize(ground, edges, splits, lengths), {g: g for g in ground}, dev)


def _realize(ground, edges, splits, lengths):
    """Metric tree with unit pendant edges and zero internal edges contracted."""
    n = len(ground)
    parent = {}

    def find(a):
        while parent.get(a, a) != a:
            a = parent[a]
        return a

    length_of = {e: l for (e, _), l in zip(splits, lengths)}
    for (u, v), l in length_of.items():
        if l == 0:
            parent[find(u)] = find(v)
    out = []
    for u, v in edges:
        if u < n or v < n:
            leaf, hub = (u, v) if u < n else (v, u)
            out.append((ground[leaf], f"n{find(hub)}", Fraction(1)))
        elif length_of[(u, v)] > 0:
            out.append((f"n{find(u)}", f"n{find(v)}", length_of[(u, v)]))
    return MetricTree(out, leaves=list(ground))
