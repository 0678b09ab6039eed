import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.errors import InvalidStructureError, UnknownNodeError
from hypercross.metric_tree import h_tree, random_tree, tree_crossratio
from hypercross.quasimetric import (
    QuasimetricSpace,
    crossratio_from_qm,
    find_geodesic_segment,
    qm_crossratio,
    qm_defect,
    rho_on_triples,
    triple_rho,
)
from hypercross.tree_boundary.rays import BoundaryPoint, RegularTreeModel, boundary_crossratio, ray_median


def tree_space(t, pts=None):
    pts = list(t.leaves if pts is None else pts)
    return QuasimetricSpace(pts, lambda x, y: t.distance(x, y))


class TestDefect:
    def test_example(self):
        m = {("a", "b"): 5, ("a", "c"): 1, ("c", "b"): 1}
        assert qm_defect(m, ["a", "b", "c"]) == 3

    def test_single_point(self):
        assert qm_defect([[0]]) == 0

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidStructureError):
            qm_defect([[0, 1], [2, 0]])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_metrics_have_zero_defect(self, seed):
        t = random_tree(random.Random(seed), 6)
        assert tree_space(t, t.nodes).defect == 0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 9), min_size=6, max_size=6))
    def test_defect_is_least(self, vals):
        pts = "abcd"
        m = dict(zip(combinations(pts, 2), vals))
        k = qm_defect(m, list(pts))
        q = QuasimetricSpace(list(pts), m)
        slack = [q(x, y) - q(x, z) - q(z, y) for x, y, z in permutations(pts, 3)]
        assert k == max([Fraction(0)] + slack)


class TestCrossratio:
    def test_h_tree_leaf_metric(self):
        tbl = crossratio_from_qm(tree_space(h_tree()))
        assert tbl("x", "y", "z", "w") == 1

    def test_equidistant(self):
        q = QuasimetricSpace("abcd", lambda x, y: 0 if x == y else 2)
        tbl = crossratio_from_qm(q)
        assert {v for *_, v in tbl.items()} == {0}

    def test_degenerate(self):
        q = tree_space(h_tree())
        assert qm_crossratio(q.rho, "x", "x", "z", "w") == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 8))
    def test_tree_metric_reproduces_tree_crossratio(self, seed, n):
        t = random_tree(random.Random(seed), n)
        q = tree_space(t)
        for x, y, z, w in combinations(t.leaves, 4):
            assert qm_crossratio(q.rho, x, y, z, w) == tree_crossratio(t, x, y, z, w)


def f2_rays():
    # 4-regular tree (Cayley graph of F2); X spreads from the root, Y from vertex 00
    X = [BoundaryPoint((a,), (a,)) for a in (0, 1, 2)]
    Y = [BoundaryPoint((0, 0, a), (a,)) for a in (0, 1, 2)]
    return RegularTreeModel.regular(4, 12), X, Y


class TestTriples:
    def test_f2_example(self):
        model, X, Y = f2_rays()

        def cr(a, b, c, d):
            return Fraction(boundary_crossratio(model, a, b, c, d))

        assert ray_median(*X) == () and ray_median(*Y) == (0, 0)
        assert triple_rho(cr, X, Y) == 2

    def test_same_triple_and_permutations(self):
        model, X, Y = f2_rays()

        def cr(a, b, c, d):
            return Fraction(boundary_crossratio(model, a, b, c, d))

        assert triple_rho(cr, X, X) == 0
        for P in permutations(X):
            assert triple_rho(cr, P, Y) == triple_rho(cr, X, Y)

    def test_rho_on_tree_triples_is_median_distance(self):
        t = random_tree(random.Random(11), 6)
        from hypercross.crossratio import table_from_tree
        from hypercross.metric_tree import tree_median

        tbl = table_from_tree(t)
        q = rho_on_triples(tbl)
        assert q.defect == 0
        X, Y = q.points[0], q.points[-1]
        mx, my = tree_median(t, *X), tree_median(t, *Y)
        if isinstance(mx, str) and isinstance(my, str):
            assert q(X, Y) == t.distance(mx, my)

    def test_repeated_point(self):
        from hypercross.crossratio import table_from_tree

        with pytest.raises(InvalidStructureError):
            rho_on_triples(table_from_tree(h_tree()), [("x", "x", "y")])


class TestGeodesic:
    def line(self, n=6):
        return QuasimetricSpace(range(n), lambda x, y: abs(x - y))

    def test_line(self):
        seg = find_geodesic_segment(self.line(), 0, 0, 5)
        assert seg.points == [0, 1, 2, 3, 4, 5]

    def test_single_point(self):
        assert find_geodesic_segment(self.line(), 3, 2, 2).points == [2]

    def test_no_interpolants(self):
        q = QuasimetricSpace("ab", {("a", "b"): 10})
        assert find_geodesic_segment(q, 1, "a", "b") is None

    def test_unknown_point(self):
        with pytest.raises(UnknownNodeError):
            find_geodesic_segment(self.line(), 0, 0, 99)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2))
    def test_segment_is_k_geodesic(self, n, k):
        q = self.line(n)
        seg = find_geodesic_segment(q, k, 0, n - 1)
        pts = seg.points
        for i, j in combinations(range(len(pts)), 2):
            assert abs(q(pts[i], pts[j]) - (j - i)) <= k


def test_json_round_trip():
    q = QuasimetricSpace("abc", {("a", "b"): Fraction(1, 2), ("a", "c"): 1, ("b", "c"): 3})
    again = QuasimetricSpace.from_json(q.to_json())
    assert again.defect == q.defect == Fraction(3, 2)
    assert again("a", "b") == Fraction(1, 2)
