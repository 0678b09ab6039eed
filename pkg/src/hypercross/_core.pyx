# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; see ``_core_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp

from hypercross._core_py import LABELINGS5, POS_QUADS, LABELING_ORDERS5, PAIRINGS4, all_subsets

cnp.import_array()

ctypedef long long i64


cdef inline i64 _abs(i64 a) nogil:
    return -a if a < 0 else a


cdef inline i64 _max(i64 a, i64 b) nogil:
    return a if a > b else b


def hyperbolicity_costs(values, subsets4, subsets5):
    cdef i64[:, :, :, ::1] V = np.ascontiguousarray(values, dtype=np.int64)
    cdef i64[:, ::1] s4 = np.ascontiguousarray(np.asarray(subsets4, dtype=np.int64).reshape(-1, 4))
    cdef i64[:, ::1] s5 = np.ascontiguousarray(np.asarray(subsets5, dtype=np.int64).reshape(-1, 5))
    cdef i64[:, ::1] pq = np.ascontiguousarray(POS_QUADS, dtype=np.int64)
    cdef i64[:, ::1] lab = np.ascontiguousarray(LABELINGS5, dtype=np.int64)
    cdef Py_ssize_t n4 = s4.shape[0], n5 = s5.shape[0]
    out_c4 = np.zeros(n4, dtype=np.int64)
    out_l4 = np.zeros(n4, dtype=np.int64)
    out_c5 = np.zeros(n5, dtype=np.int64)
    out_l5 = np.zeros(n5, dtype=np.int64)
    cdef i64[::1] c4 = out_c4, l4 = out_l4, c5 = out_c5, l5 = out_l5
    cdef Py_ssize_t s, j, t
    cdef i64 a, b, c, d, v0, v1, v2, best, cost
    cdef i64 v[15]
    cdef i64 pts[5]
    with nogil:
        for s in range(n4):
            a = s4[s, 0]; b = s4[s, 1]; c = s4[s, 2]; d = s4[s, 3]
            v0 = V[a, b, c, d]
            v1 = V[a, c, b, d]
            v2 = V[a, d, b, c]
            best = _max(v1, v2); l4[s] = 0
            cost = _max(v0, v2)
            if cost < best:
                best = cost; l4[s] = 1
            cost = _max(v0, v1)
            if cost < best:
                best = cost; l4[s] = 2
            c4[s] = best
        for s in range(n5):
            for t in range(5):
                pts[t] = s5[s, t]
            for t in range(15):
                v[t] = V[pts[pq[t, 0]], pts[pq[t, 1]], pts[pq[t, 2]], pts[pq[t, 3]]]
            best = -1
            for j in range(120):
                cost = _abs(v[lab[j, 0]] - v[lab[j, 1]])
                cost = _max(cost, _abs(v[lab[j, 2]] - v[lab[j, 3]]))
                cost = _max(cost, _abs(v[lab[j, 4]] - v[lab[j, 0]] - v[lab[j, 2]]))
                for t in range(5, 15):
                    cost = _max(cost, v[lab[j, t]])
                if best < 0 or cost < best:
                    best = cost
                    l5[s] = j
                    if best == 0:
                        break
            c5[s] = best
    return out_c4, out_l4, out_c5, out_l5


def hausdorff_level(levels, cells, P, Q):
    cdef i64[:, ::1] L = np.ascontiguousarray(levels, dtype=np.int64)
    cdef i64[:, ::1] cl = np.ascontiguousarray(np.asarray(cells, dtype=np.int64).reshape(-1, 2))
    cdef i64[::1] Pv = np.ascontiguousarray(P, dtype=np.int64)
    cdef i64[::1] Qv = np.ascontiguousarray(Q, dtype=np.int64)
    cdef Py_ssize_t k = cl.shape[0], m = L.shape[0]
    cdef Py_ssize_t i, j, y
    cdef i64 lev = 1 << 62, best, np_, nq, cur, x0, y0
    with nogil:
        for i in range(k):
            x0 = cl[i, 0]; y0 = cl[i, 1]
            np_ = -(1 << 62)
            for j in range(Pv.shape[0]):
                np_ = _max(np_, L[x0, Pv[j]])
            nq = -(1 << 62)
            for j in range(Qv.shape[0]):
                nq = _max(nq, L[y0, Qv[j]])
            cur = _max(np_, nq)
            if cur < lev:
                lev = cur
        for j in range(Pv.shape[0]):
            for y in range(m):
                best = -(1 << 62)
                for i in range(k):
                    cur = L[Pv[j], cl[i, 0]]
                    if L[y, cl[i, 1]] < cur:
                        cur = L[y, cl[i, 1]]
                    if cur > best:
                        best = cur
                if best < lev:
                    lev = best
        for j in range(Qv.shape[0]):
            for y in range(m):
                best = -(1 << 62)
                for i in range(k):
                    cur = L[y, cl[i, 0]]
                    if L[Qv[j], cl[i, 1]] < cur:
                        cur = L[Qv[j], cl[i, 1]]
                    if cur > best:
                        best = cur
                if best < lev:
                    lev = best
    return int(lev)


def fixed_point_counts(perms):
    arr = np.asarray(perms, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    cdef i64[:, ::1] pm = np.ascontiguousarray(arr)
    out = np.zeros(pm.shape[0], dtype=np.int64)
    cdef i64[::1] o = out
    cdef Py_ssize_t g, i
    with nogil:
        for g in range(pm.shape[0]):
            for i in range(pm.shape[1]):
                if pm[g, i] == i:
                    o[g] += 1
    return out


def longest_chain(lt, order):
    cdef cnp.uint8_t[:, ::1] L = np.ascontiguousarray(lt, dtype=np.uint8)
    cdef i64[::1] o = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t k = o.shape[0], i, j
    if k == 0:
        return 0
    dp_arr = np.ones(k, dtype=np.int64)
    cdef i64[::1] dp = dp_arr
    cdef i64 best, top = 1
    with nogil:
        for j in range(1, k):
            best = 0
            for i in range(j):
                if L[o[i], o[j]] and dp[i] > best:
                    best = dp[i]
            dp[j] = best + 1
            if dp[j] > top:
                top = dp[j]
    return int(top)
