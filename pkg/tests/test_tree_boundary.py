import random
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hypercross.errors import InvalidStructureError, NoWitnessError, ResolutionError
from hypercross.metric_tree import tree_crossratio
from hypercross.tree_boundary import (
    AtomSpace,
    AxisShift,
    BoundaryPoint,
    RegularTreeModel,
    approximating_subtree,
    boundary_crossratio,
    child_swap,
    classify_automorphism,
    collapsing_limit,
    conical_witness,
    gerasimov_limit,
    interpolated_ray,
    ray_median,
    ray_triple_geodesic,
)
from hypercross.tree_boundary.automorphism import Identity
from hypercross.tree_boundary.dynamics import eventually_monotone
from hypercross.tree_boundary.rays import random_ray, vertex_name

ZERO, ONE, TWO = BoundaryPoint((), (0,)), BoundaryPoint((), (1,)), BoundaryPoint((2,), (0,))


def ball_graph(model, n):
    g = nx.Graph()
    for v in model.ball(n):
        if v:
            g.add_edge(v[:-1], v)
    return g


def leaf_crossratio(model, rays, n):
    """Four-point crossratio of the depth-n truncations, by BFS distances."""
    g = ball_graph(model, n)
    x, y, z, w = (r.word(n) for r in rays)
    d = lambda a, b: nx.shortest_path_length(g, a, b)  # noqa: E731
    return max(0, (d(x, z) + d(y, w) - d(x, y) - d(z, w)) // 2)


class TestCrossratio:
    def test_binary_example(self):
        # geodesics [000.., 001..] and [110.., 111..] turn at 00 and 11, four edges apart
        model = RegularTreeModel.binary(10)
        rays = [BoundaryPoint((0, 0), (0,)), BoundaryPoint((0, 0), (1,)),
                BoundaryPoint((1, 1), (0,)), BoundaryPoint((1, 1), (1,))]
        assert boundary_crossratio(model, *rays) == 4
        assert leaf_crossratio(model, rays, 8) == 4

    def test_separate_cylinders(self):
        model = RegularTreeModel.regular(3, 8)
        rays = [BoundaryPoint((0, 0), (0,)), BoundaryPoint((0, 1), (0,)),
                BoundaryPoint((1, 0), (0,)), BoundaryPoint((1, 1), (0,))]
        assert boundary_crossratio(model, *rays) >= 1

    def test_indistinguishable(self):
        with pytest.raises(ResolutionError):
            boundary_crossratio(RegularTreeModel.binary(4), ZERO, ZERO, ONE, BoundaryPoint((1, 1), (0,)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_leaf_distances_and_dual_exclusion(self, seed):
        rng = random.Random(seed)
        model = RegularTreeModel.regular(3, 6)
        rays = [random_ray(rng, model, 5, periodic=True) for _ in range(4)]
        assume(len({r.word(5) for r in rays}) == 4)
        x, y, z, w = rays
        assert boundary_crossratio(model, x, y, z, w) == leaf_crossratio(model, rays, 6)
        vals = [boundary_crossratio(model, *q) for q in ((x, y, z, w), (x, z, y, w), (x, w, y, z))]
        assert sum(v > 0 for v in vals) <= 1


class TestBoundaryPoint:
    def test_canonical_equality(self):
        assert BoundaryPoint((0,), (0,)) == BoundaryPoint((0, 0, 0), (0, 0))
        assert hash(BoundaryPoint((0,), (0,))) == hash(BoundaryPoint((), (0,)))
        assert BoundaryPoint((1,), (0, 1)) == BoundaryPoint((1, 0), (1, 0))

    def test_truncated_depth(self):
        x = BoundaryPoint.truncated((0, 1))
        with pytest.raises(ResolutionError):
            x.word(3)

    def test_median(self):
        assert ray_median(ZERO, ONE, TWO) == ()
        assert ray_median(ZERO, BoundaryPoint((0, 1), (0,)), ONE) == (0,)


class TestSubtree:
    model = RegularTreeModel.binary(8)

    def test_two_rays_path(self):
        tree, mapping, dev = approximating_subtree(self.model, [ZERO, ONE])
        assert len(tree.nodes) == 3 and dev == 0

    def test_h_shape(self):
        rays = [BoundaryPoint((0, 0), (0,)), BoundaryPoint((0, 0), (1,)),
                BoundaryPoint((1, 1), (0,)), BoundaryPoint((1, 1), (1,))]
        tree, mapping, dev = approximating_subtree(self.model, rays)
        assert dev == 0
        assert tree_crossratio(tree, *(mapping[i] for i in range(4))) == 4
        assert sorted(tree.degree(n) for n in tree.nodes if tree.degree(n) >= 3) == [3, 3]

    def test_inside_cylinder(self):
        rays = [BoundaryPoint((0, 1, 0), (0,)), BoundaryPoint((0, 1, 1), (0,)), BoundaryPoint((0, 1, 1), (1,))]
        tree, mapping, dev = approximating_subtree(self.model, rays)
        below = vertex_name((0, 1))
        assert all(mapping[i].startswith(below) for i in range(3))
        assert max(tree.degree(n) for n in tree.nodes) == 3

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 6))
    def test_deviation_zero(self, seed, n):
        rng = random.Random(seed)
        model = RegularTreeModel.regular(3, 10)
        rays = [random_ray(rng, model, 5, periodic=True) for _ in range(n)]
        assume(len({r.word(5) for r in rays}) == n)
        assert approximating_subtree(model, rays)[2] == 0


class TestClassify:
    model = RegularTreeModel.regular(3, 6)

    def test_identity(self):
        assert classify_automorphism(Identity(self.model)).kind == "elliptic"

    def test_child_swap(self):
        cls = classify_automorphism(child_swap(RegularTreeModel.binary(6)))
        assert cls.kind == "elliptic" and cls.fixed == ()

    def test_shift(self):
        cls = classify_automorphism(AxisShift(self.model, 1))
        assert cls.kind == "loxodromic" and cls.translation_length == 1
        assert cls.attracting.prefix == (0,) * 6

    @pytest.mark.parametrize("k", [1, 2, 3, -2])
    def test_translation_length(self, k):
        assert classify_automorphism(AxisShift(self.model, k)).translation_length == abs(k)


class TestDynamics:
    model = RegularTreeModel.regular(3, 6)
    g = AxisShift(model, 1)

    def powers(self, n=8):
        return [self.g.power(i) for i in range(1, n + 1)]

    def test_collapsing_powers(self):
        lim = collapsing_limit(self.powers(), 6)
        att, rep = self.g.exact_ends()
        assert lim.a.prefix == rep.word(6) and lim.c.prefix == att.word(6)
        assert lim.trace == sorted(lim.trace, reverse=True)
        assert eventually_monotone(lim.trace) == 0

    def test_identity_sequence(self):
        assert collapsing_limit([Identity(self.model)] * 6, 6) is None

    def test_alternating(self):
        seq = [self.g if i % 2 == 0 else self.g.inverse() for i in range(8)]
        assert collapsing_limit(seq, 6) is None

    def test_gerasimov_agrees(self):
        lim = gerasimov_limit(self.powers(), 3, 6)
        col = collapsing_limit(self.powers(), 6)
        assert [x.prefix for x in lim.P] == [col.a.prefix]
        assert [x.prefix for x in lim.Q] == [col.c.prefix]

    def test_gerasimov_budget_two(self):
        with pytest.raises(NoWitnessError):
            gerasimov_limit(self.powers(), 2, 6)

    def test_gerasimov_identity(self):
        with pytest.raises(NoWitnessError):
            gerasimov_limit([Identity(self.model)] * 8, 3, 6)

    def test_hausdorff_levels_backends_agree(self):
        space = AtomSpace(self.model, 4)
        from hypercross import _core_py, kernels

        cells = space.cells(self.g)
        assert kernels.hausdorff_level(space.levels, cells, [0], [5]) == \
            _core_py.hausdorff_level(space.levels, cells, [0], [5])


class TestConical:
    model = RegularTreeModel.regular(3, 6)
    g = AxisShift(model, 1)

    def test_repelling_end(self):
        att, rep = self.g.exact_ends()
        w = conical_witness(rep, self.g, 6)
        assert not w.conjugated
        assert w.b.prefix == rep.word(6) and w.c.prefix == att.word(6)
        assert w.tukia_separation > 0

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_generic_point(self, seed):
        x = random_ray(random.Random(seed), self.model, 6, periodic=True)
        w = conical_witness(x, self.g, 6)
        assert w.b.prefix == x.word(6) and w.b.prefix != w.c.prefix

    def test_elliptic_rejected(self):
        with pytest.raises(InvalidStructureError):
            conical_witness(ZERO, child_swap(self.model), 6)


class TestInterpolation:
    model = RegularTreeModel.regular(3, 8)

    def test_binary_length_zero(self):
        b = RegularTreeModel.binary(6)
        a, bb, c = BoundaryPoint((), (1,)), BoundaryPoint((), (0,)), BoundaryPoint((0,), (1,))
        assert interpolated_ray(a, bb, c, 0, b) == [c]

    def test_binary_root_has_no_off_axis_neighbour(self):
        b = RegularTreeModel.binary(6)
        with pytest.raises(ResolutionError):
            interpolated_ray(BoundaryPoint((), (1,)), BoundaryPoint((), (0,)), BoundaryPoint((0,), (1,)), 1, b)

    def test_equal_ends(self):
        with pytest.raises(InvalidStructureError):
            interpolated_ray(ZERO, ZERO, ONE, 2, self.model)
        with pytest.raises(InvalidStructureError):
            ray_triple_geodesic(ZERO, ZERO, 2, self.model)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(1, 5))
    def test_window_is_exact(self, seed, length):
        rng = random.Random(seed)
        a, b, c = (random_ray(rng, self.model, 3, periodic=True) for _ in range(3))
        assume(len({a, b, c}) == 3)
        xs = interpolated_ray(a, b, c, length, self.model)
        assert len(xs) == 2 * length + 1
        depth = 3 + 2 * length + 8
        for i, j in combinations(range(len(xs)), 2):
            assert boundary_crossratio(self.model, b, xs[i], a, xs[j], depth) == j - i

    def test_triple_geodesic_window(self):
        a, b, c = ZERO, ONE, TWO
        tg = ray_triple_geodesic(a, b, 3, self.model, centre=(a, b, c))
        assert tg.max_deviation == 0 and tg.centre_deviation == 0
        assert tg.rho[(-3, 3)] == 6
