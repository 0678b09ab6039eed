import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross import _core_py, kernels

compiled = pytest.importorskip("hypercross._core")


def random_values(rng, n):
    V = rng.integers(0, 5, size=(n, n, n, n)).astype(np.int64)
    # symmetrize the way the dense table is laid out
    return np.maximum.reduce([V, V.transpose(1, 0, 2, 3), V.transpose(0, 1, 3, 2), V.transpose(2, 3, 0, 1)])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(5, 7))
def test_hyperbolicity_costs_agree(seed, n):
    rng = np.random.default_rng(seed)
    V = random_values(rng, n)
    s4, s5 = _core_py.all_subsets(n, 4), _core_py.all_subsets(n, 5)
    for a, b in zip(compiled.hyperbolicity_costs(V, s4, s5), _core_py.hyperbolicity_costs(V, s4, s5)):
        assert np.array_equal(np.asarray(a), np.asarray(b))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 16))
def test_hausdorff_level_agree(seed, n):
    rng = np.random.default_rng(seed)
    L = rng.integers(0, 6, size=(n, n)).astype(np.int64)
    L = np.minimum(L, L.T)
    np.fill_diagonal(L, 6)
    cells = rng.integers(0, n, size=(3 * n, 2)).astype(np.int64)
    P = list(rng.choice(n, size=min(2, n), replace=False))
    Q = list(rng.choice(n, size=1))
    assert compiled.hausdorff_level(L, cells, P, Q) == _core_py.hausdorff_level(L, cells, P, Q)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.permutations(range(7)), min_size=1, max_size=20))
def test_fixed_point_counts_agree(perms):
    arr = np.array(perms, dtype=np.int64)
    assert np.array_equal(np.asarray(compiled.fixed_point_counts(arr)), _core_py.fixed_point_counts(arr))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 30))
def test_longest_chain_agree(seed, m):
    rng = np.random.default_rng(seed)
    # strictly upper triangular in a random relabelling: a DAG with known order
    upper = np.triu(rng.random((m, m)) < 0.3, k=1)
    perm = rng.permutation(m)
    lt = np.zeros((m, m), dtype=np.uint8)
    lt[np.ix_(perm, perm)] = upper
    order = perm
    a = compiled.longest_chain(lt, order)
    b = _core_py.longest_chain(lt, order)
    assert a == b
    assert 1 <= a <= m


def test_longest_chain_empty():
    lt = np.zeros((3, 3), dtype=np.uint8)
    assert kernels.longest_chain(lt, np.array([], dtype=np.int64)) == 0


def test_backend_selected():
    assert kernels.BACKEND == "cython"


def test_pure_fallback_env():
    env = dict(os.environ, HYPERCROSS_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from hypercross import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
