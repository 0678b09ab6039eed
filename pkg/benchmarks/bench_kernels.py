"""Time the compiled core against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from hypercross import _core_py

try:
    from hypercross import _core
except ImportError:
    _core = None


def inputs(seed=0):
    rng = np.random.default_rng(seed)
    n = 10
    V = rng.integers(0, 6, size=(n, n, n, n)).astype(np.int64)
    V = np.maximum.reduce([V, V.transpose(1, 0, 2, 3), V.transpose(0, 1, 3, 2), V.transpose(2, 3, 0, 1)])
    s4, s5 = _core_py.all_subsets(n, 4), _core_py.all_subsets(n, 5)

    m = 64
    L = rng.integers(0, 8, size=(m, m)).astype(np.int64)
    L = np.minimum(L, L.T)
    cells = rng.integers(0, m, size=(4 * m, 2)).astype(np.int64)

    perms = np.array([rng.permutation(9) for _ in range(5000)], dtype=np.int64)

    c = 300
    lt = np.triu(rng.random((c, c)) < 0.05, k=1).astype(np.uint8)
    order = np.arange(c, dtype=np.int64)
    return {
        "hyperbolicity_costs": (V, s4, s5),
        "hausdorff_level": (L, cells, [0, 1, 2], [3, 4]),
        "fixed_point_counts": (perms,),
        "longest_chain": (lt, order),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = inputs()
    print(f"{'kernel':22s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, call_args in cases.items():
        py = min(timeit.repeat(lambda: getattr(_core_py, name)(*call_args), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{name:22s} {py * 1e3:10.2f} {'n/a':>10s}")
            continue
        cy = min(timeit.repeat(lambda: getattr(_core, name)(*call_args), number=1, repeat=args.repeat))
        print(f"{name:22s} {py * 1e3:10.2f} {cy * 1e3:10.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
