"""Pure-Python simulation kernels.

Reference implementations of the compiled kernels in ``_kernels.pyx``; both
consume identical random inputs and must return identical outputs.
"""
import heapq
import math

INF = math.inf


def first_passage_batch(indptr, indices, weights, sources, blocked, horizon, out):
    """Infection times of SI replicas as first-passage times.

    For replica ``r``, node ``i`` infected at ``T_i`` infects neighbor
    ``indices[e]`` (``e`` in row ``i``) after the delay ``weights[r, e]``.
    ``T`` is the shortest-path distance from the source set, so Dijkstra
    computes it. Nodes not reached by ``horizon`` (or blocked) get ``inf``.

    Parameters
    ----------
    indptr, indices : int64 arrays
        CSR neighbor lists.
    weights : (R, nnz) float64
        Transmission delays per directed adjacency entry.
    sources : (R, n) uint8
        Initial infected indicator per replica.
    blocked : (n,) uint8
        Immunized nodes; never infected, never transmit.
    horizon : float
    out : (R, n) float64
        Filled with infection times.
    """
    indptr = indptr.tolist()
    indices = indices.tolist()
    blocked = blocked.tolist()
    n = len(indptr) - 1
    for r in range(len(out)):
        w = weights[r].tolist()
        src = sources[r].tolist()
        dist = [INF] * n
        heap = []
        for i in range(n):
            if src[i] and not blocked[i]:
                dist[i] = 0.0
                heap.append((0.0, i))
        heapq.heapify(heap)
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if d > horizon:
                break
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if blocked[v]:
                    continue
                nd = d + w[e]
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        row = out[r]
        for i in range(n):
            row[i] = dist[i] if dist[i] <= horizon else INF


def _fen_add(fen, n, i, delta):
    i += 1
    while i <= n:
        fen[i] += delta
        i += i & -i


def _fen_find(fen, n, target):
    # smallest index j with prefix_sum(j) > target
    pos = 0
    step = 1 << (n.bit_length() - 1) if n else 0
    while step:
        nxt = pos + step
        if nxt <= n and fen[nxt] <= target:
            pos = nxt
            target -= fen[nxt]
        step >>= 1
    return pos


def sis_advance(indptr, indices, infected, inf_list, pos, weight, fen, clock, ints,
                grid, uniforms, beta, delta, counts, node_sum):
    """Advance one SIS replica (Gillespie) through a buffer of uniforms.

    State lives in the passed arrays so the driver can resume with a fresh
    buffer. Every event uses exactly three uniforms: waiting time, event
    type, and the choice of node (uniform infected node for a recovery; a
    susceptible node weighted by its infected-neighbor count, via a Fenwick
    tree, for an infection).

    ``clock[0]`` is the current time; ``ints`` holds ``[grid_index, n_inf,
    total_weight, done]``. Returns the number of uniforms consumed.
    """
    n = len(infected)
    ngrid = len(grid)
    t = clock[0]
    gi, n_inf, total_w, done = (int(v) for v in ints)
    k = 0
    nu = len(uniforms)
    while not done:
        rate = beta * total_w + delta * n_inf
        if rate <= 0:
            while gi < ngrid:
                counts[gi] = n_inf
                node_sum[gi] += infected
                gi += 1
            done = 1
            break
        if k + 3 > nu:
            break
        u1 = uniforms[k]
        u2 = uniforms[k + 1]
        u3 = uniforms[k + 2]
        k += 3
        tn = t - math.log1p(-u1) / rate
        while gi < ngrid and grid[gi] < tn:
            counts[gi] = n_inf
            node_sum[gi] += infected
            gi += 1
        t = tn
        if gi >= ngrid:
            done = 1
            break
        if u2 * rate < delta * n_inf:
            idx = int(u3 * n_inf)
            if idx >= n_inf:
                idx = n_inf - 1
            j = int(inf_list[idx])
            # remove j from the infected list
            last = int(inf_list[n_inf - 1])
            inf_list[idx] = last
            pos[last] = idx
            pos[j] = -1
            n_inf -= 1
            infected[j] = 0
            cnt = 0
            for e in range(indptr[j], indptr[j + 1]):
                v = int(indices[e])
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
            target = int(u3 * total_w)
            if target >= total_w:
                target = total_w - 1
            j = _fen_find(fen, n, target)
            wj = int(weight[j])
            weight[j] = 0
            _fen_add(fen, n, j, -wj)
            total_w -= wj
            infected[j] = 1
            inf_list[n_inf] = j
            pos[j] = n_inf
            n_inf += 1
            for e in range(indptr[j], indptr[j + 1]):
                v = int(indices[e])
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
