import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.crossratio import (
    CrossratioTable,
    check_path_property,
    cr_ball,
    fit_tree,
    hyperbolicity_constant,
    quasi_ultrametric_matrix,
    table_from_tree,
)
from hypercross.errors import InvalidStructureError, MissingEntryError, TooLargeError
from hypercross.metric_tree import h_tree, random_tree, tree_crossratio
from hypercross.rational import INF


def h_table():
    return table_from_tree(h_tree())


def pairing(a, b, c, d):
    return frozenset([frozenset([a, b]), frozenset([c, d])])


def brute_k(tbl):
    """Straight transcription of the two axioms over the table's values."""
    g = tbl.ground
    k = Fraction(0)
    for a, b, c, d in combinations(g, 4):
        k = max(k, min(max(tbl(*q2), tbl(*q3)) for q2, q3 in (
            ((a, c, b, d), (a, d, b, c)), ((a, b, c, d), (a, d, b, c)), ((a, b, c, d), (a, c, b, d)))))
    for five in combinations(g, 5):
        everything = {pairing(*q) for four in combinations(five, 4)
                      for q in (four, (four[0], four[2], four[1], four[3]), (four[0], four[3], four[1], four[2]))}
        best = None
        for x, y, z, w, u in permutations(five):
            A, B, C, D, E = (tbl(x, y, z, u), tbl(x, y, w, u), tbl(x, u, z, w), tbl(y, u, z, w), tbl(x, y, z, w))
            named = {pairing(x, y, z, u), pairing(x, y, w, u), pairing(x, u, z, w),
                     pairing(y, u, z, w), pairing(x, y, z, w)}
            rest = [tbl(*[p for pair in q for p in sorted(pair)]) for q in everything - named]
            cost = max([abs(A - B), abs(C - D), abs(E - A - C)] + rest)
            best = cost if best is None else min(best, cost)
        k = max(k, best)
    return k


def random_table(rng, n, top=3):
    return CrossratioTable.from_function(range(n), lambda *q: Fraction(rng.randint(0, top)))


class TestHyperbolicity:
    def test_h_tree(self):
        cert = hyperbolicity_constant(h_table())
        assert cert.k == 0
        assert cert.violation is None

    def test_single_quad_k3(self):
        tbl = CrossratioTable("xyzw", [("x", "y", "z", "w", 0), ("x", "z", "y", "w", 3), ("x", "w", "y", "z", 3)])
        assert hyperbolicity_constant(tbl).k == 3

    def test_bound_reports_violation(self):
        tbl = CrossratioTable("xyzw", [("x", "y", "z", "w", 0), ("x", "z", "y", "w", 3), ("x", "w", "y", "z", 3)])
        cert = hyperbolicity_constant(tbl, bound=2)
        subset, _, cost = cert.violation
        assert set(subset) == set("xyzw") and cost == 3

    def test_missing_entry(self):
        tbl = CrossratioTable("xyzw", [("x", "y", "z", "w", 0)])
        with pytest.raises(MissingEntryError):
            hyperbolicity_constant(tbl)

    def test_too_small(self):
        with pytest.raises(InvalidStructureError):
            hyperbolicity_constant(CrossratioTable("xyz"))

    def test_infinite_values_excluded(self):
        tbl = CrossratioTable.from_function("abcde", lambda *q: INF if set(q) == set("abcd") else Fraction(0))
        cert = hyperbolicity_constant(tbl)
        assert ("a", "b", "c", "d") in cert.excluded
        assert cert.k == 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 6))
    def test_matches_brute_force(self, seed, n):
        tbl = random_table(random.Random(seed), n)
        assert hyperbolicity_constant(tbl).k == brute_k(tbl)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 8))
    def test_trees_are_zero_hyperbolic(self, seed, n):
        assert hyperbolicity_constant(table_from_tree(random_tree(random.Random(seed), n))).k == 0


class TestTable:
    def test_symmetry_normal_form(self):
        tbl = h_table()
        assert tbl("x", "y", "z", "w") == tbl("y", "x", "w", "z") == tbl("z", "w", "x", "y") == 1

    def test_rejects_negative_and_conflicts(self):
        with pytest.raises(InvalidStructureError):
            CrossratioTable("xyzw", [("x", "y", "z", "w", -1)])
        with pytest.raises(InvalidStructureError):
            CrossratioTable("xyzw", [("x", "y", "z", "w", 1), ("y", "x", "z", "w", 2)])

    def test_json_round_trip(self):
        tbl = table_from_tree(random_tree(random.Random(5), 6))
        again = CrossratioTable.from_json(tbl.to_json())
        assert list(again.items()) == list(tbl.items())


class TestPathProperty:
    def test_h_tree_p0_fails(self):
        ok, _ = check_path_property(h_table(), 0)
        assert not ok

    def test_h_tree_p1(self):
        ok, wit = check_path_property(h_table(), 1)
        assert ok
        assert wit[("x", "y", "z", "w")] == ["y", "w"]

    def test_all_zero_table_p0(self):
        # a single step u_0 = y, u_1 = w needs (xy|zw) = 1 within p
        tbl = CrossratioTable.from_function("abcd", lambda *q: Fraction(0))
        ok, _ = check_path_property(tbl, 0)
        assert not ok


class TestTopology:
    def test_quasi_ultrametric_h_tree(self):
        pts, m = quasi_ultrametric_matrix(h_table(), "z", "w", 2)
        assert set(pts) == {"x", "y"}
        assert m["x"]["y"] == Fraction(1, 2)
        assert m["x"]["x"] == 0

    def test_lambda_must_exceed_one(self):
        with pytest.raises(InvalidStructureError):
            quasi_ultrametric_matrix(h_table(), "z", "w", 1)

    def test_irrational_entries_are_floats(self):
        tbl = CrossratioTable.from_function("abcd", lambda *q: Fraction(1, 2))
        _, m = quasi_ultrametric_matrix(tbl, "a", "b", 2)
        assert m["c"]["d"] == pytest.approx(2 ** -0.5)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_tree_tables_are_ultrametric(self, seed):
        # compare exponents: lam^-e is ultrametric iff e is min-superadditive
        t = random_tree(random.Random(seed), 6)
        tbl = table_from_tree(t)
        a, b = t.leaves[:2]
        pts, _ = quasi_ultrametric_matrix(tbl, a, b, 2)
        for x, y, z in permutations(pts, 3):
            assert tbl(a, b, x, y) >= min(tbl(a, b, x, z), tbl(a, b, z, y))

    def test_balls(self):
        tbl = h_table()
        assert cr_ball(tbl, "z", "w", "x", 1) == {"x", "y"}
        assert cr_ball(tbl, "z", "w", "x", 0) == {"x", "y"}
        assert cr_ball(tbl, "z", "w", "x", 2) == {"x"}
        with pytest.raises(InvalidStructureError):
            cr_ball(tbl, "z", "z", "x", 1)


class TestFit:
    def test_h_tree_round_trip(self):
        tbl = h_table()
        emb = fit_tree(tbl)
        assert emb.deviation == 0
        for x, y, z, w in permutations("xyzw"):
            assert tree_crossratio(emb.tree, x, y, z, w) == tbl(x, y, z, w)

    def test_all_zero_gives_star(self):
        emb = fit_tree(CrossratioTable.from_function("abcd", lambda *q: Fraction(0)))
        assert emb.deviation == 0
        assert max(emb.tree.degree(n) for n in emb.tree.nodes) == 4

    def test_perturbed_h_tree(self):
        # targets (1, 1, 0) on the three pairings; a tree makes two of the
        # three vanish, so one target of 1 is missed by a full unit
        tbl = CrossratioTable("xyzw", [("x", "y", "z", "w", 1), ("x", "z", "y", "w", 1), ("x", "w", "y", "z", 0)])
        assert fit_tree(tbl).deviation == 1

    def test_too_many_points(self):
        with pytest.raises(TooLargeError):
            fit_tree(random_table(random.Random(0), 9), max_points=8)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 5))
    def test_round_trip_random(self, seed, n):
        assert fit_tree(table_from_tree(random_tree(random.Random(seed), n))).deviation == 0
