"""Pure-Python (numpy) implementations of the hot kernels.

Mirrors ``_core.pyx`` function for function; ``hypercross.kernels`` picks
whichever is importable.  All arithmetic is integer, so both backends return
identical results.
"""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np


def _local_pairing_position(i, j, k, l):
    """Position (0..14) of the pairing {{i,j},{k,l}} among five local points."""
    omitted = ({0, 1, 2, 3, 4} - {i, j, k, l}).pop()
    a, b, c, d = sorted({i, j, k, l})
    partner = j if i == a else i if j == a else l if k == a else k
    return 3 * omitted + {b: 0, c: 1, d: 2}[partner]


def _build_tables():
    # position -> the four local points (ab|cd) it denotes
    pos_quads = np.zeros((15, 4), dtype=np.int64)
    for o in range(5):
        a, b, c, d = [t for t in range(5) if t != o]
        for j, (p, q, r, s) in enumerate(((a, b, c, d), (a, c, b, d), (a, d, b, c))):
            pos_quads[3 * o + j] = (p, q, r, s)
    labs = []
    for x, y, z, w, u in permutations(range(5)):
        A = _local_pairing_position(x, y, z, u)
        B = _local_pairing_position(x, y, w, u)
        C = _local_pairing_position(x, u, z, w)
        D = _local_pairing_position(y, u, z, w)
        E = _local_pairing_position(x, y, z, w)
        named = [A, B, C, D, E]
        others = [t for t in range(15) if t not in named]
        labs.append(named + others)
    return pos_quads, np.array(labs, dtype=np.int64)


POS_QUADS, LABELINGS5 = _build_tables()
LABELING_ORDERS5 = list(permutations(range(5)))
# 4-point pairings of sorted (a,b,c,d): (ab|cd), (ac|bd), (ad|bc)
PAIRINGS4 = np.array([[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]], dtype=np.int64)


def hyperbolicity_costs(values, subsets4, subsets5):
    """Per-subset minimal labeling costs of the hyperbolicity axioms.

    ``values`` is a dense (n, n, n, n) integer array of scaled crossratios.
    Returns ``(cost4, label4, cost5, label5)``; labels index the first
    labeling attaining the minimum (pairing index for 4-sets, permutation
    index into ``LABELING_ORDERS5`` for 5-sets).
    """
    values = np.asarray(values)
    s4 = np.asarray(subsets4, dtype=np.int64).reshape(-1, 4)
    s5 = np.asarray(subsets5, dtype=np.int64).reshape(-1, 5)

    if len(s4):
        g = s4[:, PAIRINGS4]  # (S, 3, 4)
        v = values[g[..., 0], g[..., 1], g[..., 2], g[..., 3]]  # (S, 3)
        # labeling j leaves the other two pairings, both must vanish
        c = np.stack([np.maximum(v[:, 1], v[:, 2]),
                      np.maximum(v[:, 0], v[:, 2]),
                      np.maximum(v[:, 0], v[:, 1])], axis=1)
        label4 = np.argmin(c, axis=1)
        cost4 = c[np.arange(len(s4)), label4]
    else:
        cost4 = np.zeros(0, dtype=values.dtype)
        label4 = np.zeros(0, dtype=np.int64)

    if len(s5):
        g = s5[:, POS_QUADS]  # (S, 15, 4)
        v = values[g[..., 0], g[..., 1], g[..., 2], g[..., 3]]  # (S, 15)
        lv = v[:, LABELINGS5]  # (S, 120, 15)
        A, B, C, D, E = (lv[..., t] for t in range(5))
        rel = np.maximum(np.maximum(abs(A - B), abs(C - D)), abs(E - A - C))
        c = np.maximum(rel, lv[..., 5:].max(axis=2))
        label5 = np.argmin(c, axis=1)
        cost5 = c[np.arange(len(s5)), label5]
    else:
        cost5 = np.zeros(0, dtype=values.dtype)
        label5 = np.zeros(0, dtype=np.int64)
    return cost4, label4, cost5, label5


def hausdorff_level(levels, cells, P, Q):
    """Closeness level of the Hausdorff distance between a cell set and P#Q.

    ``levels[x, y]`` is the closeness level of atoms x, y (distance is
    ``base ** level``).  ``cells`` lists graph cells (x, y).  The returned
    level h gives Hausdorff distance ``base ** h``.
    """
    L = np.asarray(levels)
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    P = np.asarray(P, dtype=np.int64)
    Q = np.asarray(Q, dtype=np.int64)
    xs, ys = cells[:, 0], cells[:, 1]
    # graph -> target: distance to P#Q is min(d(x,P), d(y,Q)): a max of levels
    near_p = L[np.ix_(xs, P)].max(axis=1)
    near_q = L[np.ix_(ys, Q)].max(axis=1)
    level1 = np.maximum(near_p, near_q).min()
    # target -> graph: points (p, y') and (x', q)
    level2 = None
    for p in P:
        m = np.minimum(L[p, xs][None, :], L[:, ys]).max(axis=1).min()
        level2 = m if level2 is None else min(level2, m)
    for q in Q:
        m = np.minimum(L[:, xs], L[q, ys][None, :]).max(axis=1).min()
        level2 = min(level2, m)
    return int(min(level1, level2))


def fixed_point_counts(perms):
    perms = np.asarray(perms, dtype=np.int64)
    if perms.size == 0:
        return np.zeros(0, dtype=np.int64)
    return (perms == np.arange(perms.shape[1])[None, :]).sum(axis=1)


def all_subsets(n, k):
    return np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)


def longest_chain(lt, order):
    """Length of the longest chain i_1 < ... < i_k (``lt[i, j]`` true) among
    the indices ``order``, which must list them in a topological order."""
    order = np.asarray(order, dtype=np.int64)
    k = len(order)
    if k == 0:
        return 0
    sub = np.asarray(lt, dtype=bool)[np.ix_(order, order)]
    dp = np.ones(k, dtype=np.int64)
    for j in range(1, k):
        prev = dp[:j][sub[:j, j]]
        if prev.size:
            dp[j] = prev.max() + 1
    return int(dp.max())
