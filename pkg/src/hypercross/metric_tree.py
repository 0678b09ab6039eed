"""Finite metric trees with exact rational edge lengths."""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from hypercross.errors import InvalidStructureError, UnknownNodeError
from hypercross.rational import as_rational, fmt


@dataclass(frozen=True)
class EdgePoint:
    """A point inside edge (u, v) at distance ``offset`` from u."""

    u: object
    v: object
    offset: Fraction


class MetricTree:
    """Immutable finite tree; edges carry positive rational lengths.

    ``leaves`` defaults to the degree-one nodes (a single node counts as a
    leaf of the one-point tree).
    """

    def __init__(self, edges, nodes=None, leaves=None):
        adj = {}
        if nodes is not None:
            for n in nodes:
                if n in adj:
                    raise InvalidStructureError(f"duplicate node {n!r}")
                adj[n] = {}
        elist = []
        for u, v, length in edges:
            length = as_rational(length)
            if length <= 0:
                raise InvalidStructureError(f"edge {u!r}-{v!r} has non-positive length {fmt(length)}")
            if u == v:
                raise InvalidStructureError(f"loop at {u!r}")
            for n in (u, v):
                if n not in adj:
                    if nodes is not None:
                        raise UnknownNodeError(f"edge endpoint {n!r} not among declared nodes")
                    adj[n] = {}
            if v in adj[u]:
                raise InvalidStructureError(f"repeated edge {u!r}-{v!r}")
            adj[u][v] = length
            adj[v][u] = length
            elist.append((u, v, length))
        if not adj:
            raise InvalidStructureError("a tree needs at least one node")
        if len(elist) != len(adj) - 1:
            raise InvalidStructureError(
                f"{len(adj)} nodes need {len(adj) - 1} edges, got {len(elist)}")
        start = next(iter(adj))
        seen = {start}
        todo = [start]
        while todo:
            a = todo.pop()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    todo.append(b)
        if len(seen) != len(adj):
            raise InvalidStructureError("graph is disconnected (so it also contains a cycle)")
        self._adj = adj
        self.edges = tuple(elist)
        self.nodes = tuple(adj)
        if leaves is None:
            leaves = [n for n in adj if len(adj[n]) <= 1]
        else:
            leaves = list(leaves)
            for n in leaves:
                self._check(n)
        self.leaves = tuple(leaves)
        self._dist = {}
        self._parent = {}

    def __repr__(self):
        return f"MetricTree({len(self.nodes)} nodes, {len(self.leaves)} leaves)"

    def _check(self, n):
        if n not in self._adj:
            raise UnknownNodeError(f"unknown node {n!r}")

    def neighbors(self, n):
        self._check(n)
        return dict(self._adj[n])

    def degree(self, n):
        return len(self.neighbors(n))

    def _bfs(self, src):
        if src not in self._dist:
            dist = {src: Fraction(0)}
            parent = {src: None}
            q = deque([src])
            while q:
                a = q.popleft()
                for b, length in self._adj[a].items():
                    if b not in dist:
                        dist[b] = dist[a] + length
                        parent[b] = a
                        q.append(b)
            self._dist[src] = dist
            self._parent[src] = parent
        return self._dist[src], self._parent[src]

    def distance(self, u, v) -> Fraction:
        self._check(u)
        self._check(v)
        return self._bfs(u)[0][v]

    def path(self, u, v):
        """Nodes of the simple path from u to v, inclusive."""
        self._check(u)
        self._check(v)
        parent = self._bfs(v)[1]
        out = [u]
        while out[-1] != v:
            out.append(parent[out[-1]])
        return out

    def point_at(self, u, v, t):
        """The point at distance ``t`` from u along the path towards v."""
        t = as_rational(t)
        nodes = self.path(u, v)
        acc = Fraction(0)
        for a, b in zip(nodes, nodes[1:]):
            if acc == t:
                return a
            length = self._adj[a][b]
            if acc + length > t:
                return EdgePoint(a, b, t - acc)
            acc += length
        if acc == t:
            return nodes[-1]
        raise ValueError(f"offset {fmt(t)} beyond path length {fmt(acc)}")

    # serialization

    def to_json(self):
        return {
            "nodes": [str(n) for n in self.nodes],
            "edges": [[str(u), str(v), fmt(w)] for u, v, w in self.edges],
        }

    def dumps(self):
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        edges = [(u, v, as_rational(str(w))) for u, v, w in data["edges"]]
        return cls(edges, nodes=data.get("nodes"), leaves=data.get("leaves"))

    def to_dot(self, name="tree"):
        lines = [f"graph {name} {{"]
        for n in self.nodes:
            lines.append(f'  "{n}";')
        for u, v, w in self.edges:
            lines.append(f'  "{u}" -- "{v}" [len="{fmt(w)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dot(cls, text):
        edges = []
        nodes = []
        edge_re = re.compile(r'"?([\w.:-]+)"?\s*--\s*"?([\w.:-]+)"?\s*\[([^\]]*)\]')
        node_re = re.compile(r'^\s*"?([\w.:-]+)"?\s*;\s*$')
        for lineno, line in enumerate(text.splitlines(), 1):
            m = edge_re.search(line)
            if m:
                attrs = dict(re.findall(r'(\w+)\s*=\s*"?([^",\s]+)"?', m.group(3)))
                if "len" not in attrs:
                    raise InvalidStructureError(f"line {lineno}: edge without len attribute")
                edges.append((m.group(1), m.group(2), as_rational(attrs["len"])))
                continue
            m = node_re.match(line)
            if m and m.group(1) not in ("graph", "}"):
                nodes.append(m.group(1))
        for u, v, _ in edges:
            for n in (u, v):
                if n not in nodes:
                    nodes.append(n)
        return cls(edges, nodes=nodes)


def tree_distance(t: MetricTree, u, v) -> Fraction:
    return t.distance(u, v)


def tree_median(t: MetricTree, x, y, z):
    """Point common to the three pairwise paths (a node or an EdgePoint)."""
    along = (t.distance(x, y) + t.distance(x, z) - t.distance(y, z)) / 2
    return t.point_at(x, y, along)


def tree_crossratio(t: MetricTree, x, y, z, w) -> Fraction:
    """(xy|zw): half the positive part of d(x,z)+d(y,w)-d(x,y)-d(z,w).

    Any repeated argument gives 0, matching (xy|xy) = (xy|xz) = 0; the
    formula alone would return the Gromov product for x = y.
    """
    if len({x, y, z, w}) < 4:
        for n in (x, y, z, w):
            t._check(n)
        return Fraction(0)
    d = t.distance
    val = d(x, z) + d(y, w) - d(x, y) - d(z, w)
    return max(Fraction(0), val / 2)


def path_gap(t: MetricTree, x, y, z, w) -> Fraction:
    """Distance between the paths [x,y] and [z,w], by exhaustive node pairs.

    Paths are subtrees with node endpoints, so the minimum over the
    geometric realization is attained at nodes.
    """
    p1 = t.path(x, y)
    p2 = t.path(z, w)
    return min(t.distance(a, b) for a in p1 for b in p2)


def random_tree(rng, n_leaves, max_num=12, max_den=6, binary=False):
    """Random tree with ``n_leaves`` leaves and random rational lengths.

    Internal nodes have degree >= 3, so every leaf label is a genuine leaf.
    """
    if n_leaves < 2:
        raise ValueError("need at least two leaves")

    def length():
        return Fraction(rng.randint(1, max_num), rng.randint(1, max_den))

    edges = {}
    if n_leaves == 2:
        return MetricTree([("L0", "L1", length())])
    edges[("c0", "L0")] = length()
    edges[("c0", "L1")] = length()
    edges[("c0", "L2")] = length()
    internal = ["c0"]
    for i in range(3, n_leaves):
        leaf = f"L{i}"
        if not binary and rng.random() < 0.3:
            hub = rng.choice(internal)
        else:
            (u, v), w = rng.choice(sorted(edges.items(), key=lambda kv: str(kv[0])))
            del edges[(u, v)]
            hub = f"c{len(internal)}"
            internal.append(hub)
            cut = Fraction(rng.randint(1, 9), 10) * w
            edges[(u, hub)] = cut
            edges[(hub, v)] = w - cut
        edges[(hub, leaf)] = length()
    tree = MetricTree([(u, v, w) for (u, v), w in edges.items()])
    return MetricTree(tree.edges, leaves=[f"L{i}" for i in range(n_leaves)])


def all_leaf_quadruples(t: MetricTree):
    return combinations(t.leaves, 4)


def h_tree():
    """Leaves x, y on m1 and z, w on m2; five unit edges."""
    return MetricTree([
        ("x", "m1", 1), ("y", "m1", 1), ("m1", "m2", 1), ("z", "m2", 1), ("w", "m2", 1),
    ])


def star_tree(k=4):
    names = "xyzwuvst"[:k]
    return MetricTree([(n, "c", 1) for n in names])
