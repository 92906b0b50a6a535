# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernels; see ``_pykernels`` for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, log1p
from libc.stdlib cimport malloc, free

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


cdef inline bint _less(double ka, i64 na, double kb, i64 nb) noexcept nogil:
    return ka < kb or (ka == kb and na < nb)


cdef inline void _push(double* key, i64* node, i64* size, double k, i64 v) noexcept nogil:
    cdef i64 i = size[0]
    cdef i64 parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(k, v, key[parent], node[parent]):
            key[i] = key[parent]
            node[i] = node[parent]
            i = parent
        else:
            break
    key[i] = k
    node[i] = v


cdef inline void _pop(double* key, i64* node, i64* size) noexcept nogil:
    cdef i64 last = size[0] - 1
    cdef double k = key[last]
    cdef i64 v = node[last]
    cdef i64 i = 0
    cdef i64 child
    size[0] = last
    while True:
        child = 2 * i + 1
        if child >= last:
            break
        if child + 1 < last and _less(key[child + 1], node[child + 1], key[child], node[child]):
            child += 1
        if _less(key[child], node[child], k, v):
            key[i] = key[child]
            node[i] = node[child]
            i = child
        else:
            break
    if last > 0:
        key[i] = k
        node[i] = v


def first_passage_batch(const i64[::1] indptr, const i64[::1] indices,
                        const double[:, ::1] weights, const u8[:, ::1] sources,
                        const u8[::1] blocked, double horizon, double[:, ::1] out):
    cdef i64 n = indptr.shape[0] - 1
    cdef i64 nnz = indices.shape[0]
    cdef i64 R = out.shape[0]
    cdef i64 cap = nnz + n + 1
    cdef double* key = <double*> malloc(cap * sizeof(double))
    cdef i64* node = <i64*> malloc(cap * sizeof(i64))
    cdef i64 size, r, i, e, u, v
    cdef double d, nd
    if key == NULL or node == NULL:
        free(key)
        free(node)
        raise MemoryError()
    try:
        with nogil:
            for r in range(R):
                size = 0
                for i in range(n):
                    out[r, i] = INFINITY
                for i in range(n):
                    if sources[r, i] and not blocked[i]:
                        out[r, i] = 0.0
                        _push(key, node, &size, 0.0, i)
                while size > 0:
                    d = key[0]
                    u = node[0]
                    _pop(key, node, &size)
                    if d > out[r, u]:
                        continue
                    if d > horizon:
                        break
                    for e in range(indptr[u], indptr[u + 1]):
                        v = indices[e]
                        if blocked[v]:
                            continue
                        nd = d + weights[r, e]
                        if nd < out[r, v]:
                            out[r, v] = nd
                            _push(key, node, &size, nd, v)
                for i in range(n):
                    if out[r, i] > horizon:
                        out[r, i] = INFINITY
    finally:
        free(key)
        free(node)


cdef inline void _fen_add(i64[::1] fen, i64 n, i64 i, i64 delta) noexcept nogil:
    i += 1
    while i <= n:
        fen[i] += delta
        i += i & -i


cdef inline i64 _fen_find(i64[::1] fen, i64 n, i64 target) noexcept nogil:
    cdef i64 pos = 0
    cdef i64 step = 1
    cdef i64 nxt
    if n == 0:
        return 0
    while step * 2 <= n:
        step *= 2
    while step:
        nxt = pos + step
        if nxt <= n and fen[nxt] <= target:
            pos = nxt
            target -= fen[nxt]
        step >>= 1
    return pos


def sis_advance(const i64[::1] indptr, const i64[::1] indices, u8[::1] infected,
                i64[::1] inf_list, i64[::1] pos, i64[::1] weight, i64[::1] fen,
                double[::1] clock, i64[::1] ints, const double[::1] grid,
                const double[::1] uniforms, double beta, double delta,
                i64[::1] counts, i64[:, ::1] node_sum):
    cdef i64 n = infected.shape[0]
    cdef i64 ngrid = grid.shape[0]
    cdef double t = clock[0]
    cdef i64 gi = ints[0]
    cdef i64 n_inf = ints[1]
    cdef i64 total_w = ints[2]
    cdef i64 done = ints[3]
    cdef i64 k = 0
    cdef i64 nu = uniforms.shape[0]
    cdef double rate, u1, u2, u3, tn
    cdef i64 idx, j, last, cnt, e, v, target, wj, c
    with nogil:
        while not done:
            rate = beta * total_w + delta * n_inf
            if rate <= 0:
                while gi < ngrid:
                    counts[gi] = n_inf
                    for c in range(n):
                        node_sum[gi, c] += infected[c]
                    gi += 1
                done = 1
                break
            if k + 3 > nu:
                break
            u1 = uniforms[k]
            u2 = uniforms[k + 1]
            u3 = uniforms[k + 2]
            k += 3
            tn = t - log1p(-u1) / rate
            while gi < ngrid and grid[gi] < tn:
                counts[gi] = n_inf
                for c in range(n):
                    node_sum[gi, c] += infected[c]
                gi += 1
            t = tn
            if gi >= ngrid:
                done = 1
                break
            if u2 * rate < delta * n_inf:
                idx = <i64> (u3 * n_inf)
                if idx >= n_inf:
                    idx = n_inf - 1
                j = inf_list[idx]
                last = inf_list[n_inf - 1]
                inf_list[idx] = last
                pos[last] = idx
                pos[j] = -1
                n_inf -= 1
                infected[j] = 0
                cnt = 0
                for e in range(indptr[j], indptr[j + 1]):
                    v = indices[e]
                    if infected[v]:
                        cnt += 1
                    else:
                        weight[v] -= 1
                        _fen_add(fen, n, v, -1)
                        total_w -= 1
                weight[j] = cnt
                _fen_add(fen, n, j, cnt)
                total_w += cnt
            else:
                target = <i64> (u3 * total_w)
                if target >= total_w:
                    target = total_w - 1
                j = _fen_find(fen, n, target)
                wj = weight[j]
                weight[j] = 0
                _fen_add(fen, n, j, -wj)
                total_w -= wj
                infected[j] = 1
                inf_list[n_inf] = j
                pos[j] = n_inf
                n_inf += 1
                for e in range(indptr[j], indptr[j + 1]):
                    v = indices[e]
                    if not infected[v]:
                        weight[v] += 1
                        _fen_add(fen, n, v, 1)
                        total_w += 1
    clock[0] = t
    ints[0] = gi
    ints[1] = n_inf
    ints[2] = total_w
    ints[3] = done
    return k
