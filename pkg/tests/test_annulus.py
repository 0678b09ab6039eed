import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.annulus import (
    Annulus,
    AnnulusSystem,
    annulus_metrics,
    build_cover_system,
    check_axioms,
    cylinder_system,
    induced_crossratio,
    nesting_lt,
    refine_system_step,
    separation_count,
    small_separating_annulus,
)
from hypercross.errors import InvalidStructureError, ResolutionError
from hypercross.tree_boundary.automorphism import AxisShift, child_swap
from hypercross.tree_boundary.rays import BoundaryPoint, RegularTreeModel, VisualMetric, boundary_crossratio, cylinder

SIX = range(1, 7)
A = Annulus({1, 2}, {4, 5, 6})
B = Annulus({1, 2, 3}, {5, 6})


def brute_separation(annuli, universe, K, L):
    """Longest chain by plain recursion over the nesting relation."""
    active = [a for a in annuli if set(K) <= a.minus and set(L) <= a.plus]

    @lru_cache(maxsize=None)
    def longest_from(i):
        return 1 + max((longest_from(j) for j in range(len(active))
                        if nesting_lt(active[i], active[j], universe)), default=0)

    return max((longest_from(i) for i in range(len(active))), default=0)


def brute_crossratio(annuli, universe, x, y, z, w):
    return max(brute_separation(annuli, universe, {x, y}, {z, w}),
               brute_separation(annuli, universe, {z, w}, {x, y}))


class TestNesting:
    def test_example(self):
        assert nesting_lt(A, B, SIX)
        assert not nesting_lt(B, A, SIX)

    def test_not_below_negative(self):
        assert not nesting_lt(A, -A, SIX)
        assert not nesting_lt(-A, A, SIX)

    def test_universe_mismatch(self):
        with pytest.raises(InvalidStructureError):
            nesting_lt(A, Annulus({1}, {9}), SIX)

    def test_sides_checked(self):
        with pytest.raises(InvalidStructureError):
            Annulus({1, 2}, {2, 3})
        with pytest.raises(InvalidStructureError):
            AnnulusSystem(range(1, 4), [Annulus({1}, {2, 3})])


class TestSeparation:
    def test_empty_system(self):
        assert separation_count({1}, {6}, AnnulusSystem(SIX)) == 0

    def test_chain_of_two(self):
        assert separation_count({1}, {6}, AnnulusSystem(SIX, [A, B])) == 2

    def test_unseparated(self):
        assert separation_count({1}, {2}, AnnulusSystem(SIX, [A, B])) == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_brute_force(self, seed):
        rng = random.Random(seed)
        universe = list(range(8))
        annuli = []
        for _ in range(rng.randint(1, 12)):
            atoms = rng.sample(universe, rng.randint(2, 7))
            cut = rng.randint(1, len(atoms) - 1)
            annuli.append(Annulus(atoms[:cut], atoms[cut:]))
        sys_ = AnnulusSystem(universe, annuli)
        sys_.check_partial_order()
        for K, L in [({0}, {7}), ({1, 2}, {5}), ({3}, {4, 6})]:
            assert sys_.separation_count(K, L) == brute_separation(sys_.annuli, universe, K, L)


class TestCylinderSystems:
    def test_level_one_values(self):
        model = RegularTreeModel.binary(3)
        sys_ = cylinder_system(model, 3, [1])
        assert len(sys_) == 12
        atoms = model.level(3)
        seen = set()
        for quad in combinations(atoms, 4):
            a, b, c, d = quad
            for x, y, z, w in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
                v = sys_.crossratio(x, y, z, w)
                assert v == brute_crossratio(sys_.annuli, atoms, x, y, z, w)
                seen.add(v)
        assert seen == {0, 1, 2}

    def test_empty_system_table(self):
        model = RegularTreeModel.binary(3)
        tbl = induced_crossratio(AnnulusSystem(model.level(3)), model.level(3)[:5])
        assert {v for *_, v in tbl.items()} == {0}

    def test_sample_too_small(self):
        with pytest.raises(InvalidStructureError):
            induced_crossratio(AnnulusSystem(SIX), [1, 2, 3])

    def test_grows_with_agreement(self):
        model = RegularTreeModel.binary(6)
        sys_ = cylinder_system(model, 6)
        z, w = (1, 0, 0, 0, 0, 0), (1, 1, 1, 1, 1, 1)
        vals = []
        for k in range(1, 6):
            x = (0,) * 6
            y = (0,) * k + (1,) * (6 - k)
            v = sys_.crossratio(x, y, z, w)
            geo = boundary_crossratio(model, *(BoundaryPoint.truncated(u) for u in (x, y, z, w)))
            assert v == brute_crossratio(sys_.annuli, sys_.universe, x, y, z, w)
            assert v - geo == -2
            vals.append(v)
        assert vals == [0, 1, 2, 3, 4]

    def test_partial_order_and_a2(self):
        model = RegularTreeModel.binary(4)
        sys_ = cylinder_system(model, 4)
        assert sys_.check_partial_order()
        res = check_axioms(sys_, model.level(4)[::2])
        assert res["a1"] and res["a2_k"] == 0

    def test_single_annulus_axioms(self):
        model = RegularTreeModel.binary(3)
        atoms = model.level(3)
        sys_ = AnnulusSystem(atoms, [Annulus(cylinder(model, (0, 0), 3), cylinder(model, (1, 1), 3))])
        res = check_axioms(sys_, atoms)
        assert res["a1"]
        assert not res["a4"]

    def test_json_round_trip(self):
        sys_ = cylinder_system(RegularTreeModel.binary(3), 3)
        again = AnnulusSystem.from_json(sys_.to_json())
        assert again.annuli == sys_.annuli


class TestMetrics:
    d = VisualMetric(4)
    model = RegularTreeModel.binary(4)

    def test_singletons(self):
        assert annulus_metrics(Annulus({(0, 0, 0, 0)}, {(1, 1, 1, 1)}), self.d)[0] == 0

    def test_level_one_gap(self):
        a = Annulus(cylinder(self.model, (0,)), cylinder(self.model, (1,))[:4])
        assert annulus_metrics(a, self.d)[1] == 1

    def test_sibling_cylinders(self):
        a = Annulus(cylinder(self.model, (0, 0)), cylinder(self.model, (0, 1)))
        assert annulus_metrics(a, self.d) == (Fraction(1, 4), Fraction(1, 2))


class TestSmallAnnulus:
    d = VisualMetric(4)
    model = RegularTreeModel.binary(4)
    x, y = (0, 0, 0, 0), (1, 1, 1, 1)

    def test_identity_large_s(self):
        a = small_separating_annulus(self.x, self.y, [], 2, self.d, self.model.level(4))
        assert self.x in a.minus and self.y in a.plus

    def test_swap_gives_depth_two_cylinders(self):
        swap = child_swap(self.model, (0,))
        a = small_separating_annulus(self.x, self.y, [lambda u: u, swap.image], Fraction(1, 2),
                                     self.d, self.model.level(4))
        assert a.minus == frozenset(cylinder(self.model, (0, 0)))
        assert a.plus == frozenset(cylinder(self.model, (1, 1)))

    def test_resolution_error(self):
        with pytest.raises(ResolutionError):
            small_separating_annulus(self.x, self.y, [], Fraction(1, 32), self.d, self.model.level(4),
                                     atom_diameter=self.d.atom_diameter)


class TestConstructions:
    model = RegularTreeModel.binary(4)
    atoms = model.level(4)
    triple = ((0, 0, 0, 0), (0, 1, 0, 0), (1, 0, 0, 0))
    hoods = (cylinder(model, (0, 0)), cylinder(model, (0, 1)), cylinder(model, (1,)))

    def test_identity_sample(self):
        sys_ = build_cover_system([self.triple], [self.hoods], [lambda u: u], self.atoms)
        assert len(sys_) == 2 and sys_.symmetric

    def test_three_maps(self):
        swaps = [lambda u: u, child_swap(self.model).image, child_swap(self.model, (0,)).image]
        sys_ = build_cover_system([self.triple], [self.hoods], swaps, self.atoms)
        assert len(sys_) <= 6
        assert sys_.longest_chain() <= 6

    def test_empty_sample(self):
        assert len(build_cover_system([self.triple], [self.hoods], [], self.atoms)) == 0

    def test_overlap_rejected(self):
        bad = (cylinder(self.model, (0,)), cylinder(self.model, (0, 1)), cylinder(self.model, (1,)))
        with pytest.raises(InvalidStructureError):
            build_cover_system([self.triple], [bad], [lambda u: u], self.atoms)


def refine_to(depth, steps):
    model = RegularTreeModel.binary(depth)
    d = VisualMetric(depth)
    group = [lambda u: u, child_swap(model).image]
    sys_ = AnnulusSystem(model.level(depth))
    for n in range(steps + 1):
        sys_ = refine_system_step(sys_, n, d, group, atom_diameter=d.atom_diameter)
    return model, d, sys_


class TestRefine:
    def test_n0_from_empty(self):
        _, d, sys_ = refine_to(3, 0)
        # pairs at distance >= 1 disagree at the root; each gets separated
        assert all(sys_.pair_count(x, y) > 0 for x in sys_.universe for y in sys_.universe
                   if x != y and d(x, y) >= 1)

    def test_n1_separates_root_pairs(self):
        model, d, sys_ = refine_to(4, 1)
        for x, y in combinations(model.level(4), 2):
            if x[0] != y[0]:
                assert sys_.pair_count(x, y) > 0

    def test_a4_at_resolution_eighth(self):
        model, d, sys_ = refine_to(3, 3)
        res = check_axioms(sys_, model.level(3), d=d, a4_min_distance=Fraction(1, 4))
        assert res["a4"] and res["a2_k"] == 0

    def test_two_zeros_violation_rejected(self):
        # (01|23) and (02|13) are both 1
        bad = AnnulusSystem(range(5), [Annulus({0, 1}, {2, 3}), Annulus({0, 2}, {1, 3})])
        assert bad.crossratio(0, 1, 2, 3) == bad.crossratio(0, 2, 1, 3) == 1
        with pytest.raises(InvalidStructureError):
            refine_system_step(bad, 0, lambda u, v: Fraction(u != v), [lambda u: u])
