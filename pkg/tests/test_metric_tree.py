import random
from fractions import Fraction
from itertools import permutations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.errors import InvalidStructureError, UnknownNodeError
from hypercross.metric_tree import (
    EdgePoint,
    MetricTree,
    h_tree,
    path_gap,
    random_tree,
    star_tree,
    tree_crossratio,
    tree_distance,
    tree_median,
)


def nx_graph(t):
    g = nx.Graph()
    for u, v, w in t.edges:
        g.add_edge(u, v, weight=w)
    return g


def test_h_tree_distances():
    t = h_tree()
    assert tree_distance(t, "x", "z") == 3
    assert tree_distance(t, "x", "x") == 0
    assert tree_distance(star_tree(), "x", "y") == 2


def test_medians():
    t = h_tree()
    assert tree_median(t, "x", "y", "z") == "m1"
    assert tree_median(t, "x", "x", "w") == "x"
    assert tree_median(star_tree(), "x", "z", "w") == "c"


def test_median_inside_edge():
    t = MetricTree([("a", "c", 1), ("b", "c", 3), ("d", "b", 2)])
    # path a-c-b-d; median of a, d and itself collapses to a node
    assert tree_median(t, "a", "d", "c") == "c"
    p = t.point_at("a", "d", Fraction(5, 2))
    assert p == EdgePoint("c", "b", Fraction(3, 2))


def test_crossratio_examples():
    t = h_tree()
    assert tree_crossratio(t, "x", "y", "z", "w") == 1
    assert tree_crossratio(t, "x", "z", "y", "w") == 0
    assert tree_crossratio(star_tree(), "x", "y", "z", "w") == 0
    # repeated arguments
    assert tree_crossratio(t, "x", "y", "x", "y") == 0
    assert tree_crossratio(t, "x", "y", "x", "z") == 0
    assert tree_crossratio(t, "x", "x", "z", "w") == 0


class TestStructure:
    def test_cycle_rejected(self):
        with pytest.raises(InvalidStructureError):
            MetricTree([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)])

    def test_disconnected_rejected(self):
        with pytest.raises(InvalidStructureError):
            MetricTree([("a", "b", 1), ("c", "d", 1)], nodes=["a", "b", "c", "d", "e"])

    def test_nonpositive_length(self):
        with pytest.raises(InvalidStructureError):
            MetricTree([("a", "b", 0)])

    def test_float_length_refused(self):
        with pytest.raises(TypeError):
            MetricTree([("a", "b", 0.5)])

    def test_unknown_node(self):
        with pytest.raises(UnknownNodeError):
            tree_distance(h_tree(), "x", "nope")


def test_json_and_dot_round_trip():
    t = random_tree(random.Random(3), 7)
    again = MetricTree.from_json(t.dumps())
    assert again.edges == t.edges
    back = MetricTree.from_dot(t.to_dot())
    for u in t.nodes:
        for v in t.nodes:
            assert back.distance(u, v) == t.distance(u, v)


def test_dot_error_has_line_number():
    text = 'graph t {\n  "a" -- "b" [len="1"];\n  "b" -- "c" [weight="2"];\n}\n'
    with pytest.raises(InvalidStructureError, match="line 3"):
        MetricTree.from_dot(text)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(3, 9))
def test_distance_matches_networkx(seed, n):
    t = random_tree(random.Random(seed), n)
    lengths = dict(nx.all_pairs_dijkstra_path_length(nx_graph(t)))
    for u in t.nodes:
        for v in t.nodes:
            assert tree_distance(t, u, v) == lengths[u][v]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(4, 7))
def test_crossratio_is_path_gap(seed, n):
    t = random_tree(random.Random(seed), n)
    for x, y, z, w in permutations(t.leaves, 4):
        assert tree_crossratio(t, x, y, z, w) == path_gap(t, x, y, z, w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_four_point_condition(seed):
    t = random_tree(random.Random(seed), 5)
    d = t.distance
    for x, y, z, w in permutations(t.leaves, 4):
        sums = sorted([d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)])
        assert sums[1] == sums[2]
