"""Compiled inner loops: distance kernels, greedy descent, beam search, pruning.

All kernels are deterministic: no threading, no fastmath reassociation, and
ties on distance are broken by ascending label everywhere a choice is made.
Distances are float64 accumulations over float32 coordinates.
"""

import numpy as np
from numba import njit

# Metric codes shared with the Python layer.
METRIC_L2 = 0  # squared euclidean
METRIC_IP = 1  # 1 - <a, b>
METRIC_COSINE = 2  # 1 - cos(a, b)


@njit(cache=True, inline="always", fastmath={"contract", "arcp", "nsz"})
def _pair_distance(metric, a, b):
    # float32 accumulation: coordinates are float32 and the sums stay small
    # (dim <= a few thousand), so rank decisions are insensitive to the
    # reduced precision while SIMD contraction roughly halves query cost.
    n = a.shape[0]
    if metric == METRIC_L2:
        acc = np.float32(0.0)
        for i in range(n):
            d = a[i] - b[i]
            acc += d * d
        return np.float64(acc)
    elif metric == METRIC_IP:
        acc = np.float32(0.0)
        for i in range(n):
            acc += a[i] * b[i]
        return 1.0 - np.float64(acc)
    else:
        dot = np.float32(0.0)
        na = np.float32(0.0)
        nb = np.float32(0.0)
        for i in range(n):
            x = a[i]
            y = b[i]
            dot += x * y
            na += x * x
            nb += y * y
        if na == 0.0 or nb == 0.0:
            return 1.0
        return 1.0 - np.float64(dot) / np.sqrt(np.float64(na) * np.float64(nb))


@njit(cache=True)
def distance_kernel(metric, a, b):
    return _pair_distance(metric, a, b)


# ---------------------------------------------------------------------------
# Binary heaps over parallel (distance, label, slot) arrays. The label is the
# tie-breaker so heap order is a total order for distinct points.
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _key_less(d1, l1, d2, l2):
    return d1 < d2 or (d1 == d2 and l1 < l2)


@njit(cache=True)
def _minheap_push(hd, hl, hs, size, d, lbl, slot):
    i = size
    hd[i] = d
    hl[i] = lbl
    hs[i] = slot
    while i > 0:
        p = (i - 1) >> 1
        if _key_less(hd[i], hl[i], hd[p], hl[p]):
            hd[i], hd[p] = hd[p], hd[i]
            hl[i], hl[p] = hl[p], hl[i]
            hs[i], hs[p] = hs[p], hs[i]
            i = p
        else:
            break
    return size + 1


@njit(cache=True)
def _minheap_pop(hd, hl, hs, size):
    last = size - 1
    hd[0] = hd[last]
    hl[0] = hl[last]
    hs[0] = hs[last]
    i = 0
    while True:
        lt = 2 * i + 1
        rt = lt + 1
        smallest = i
        if lt < last and _key_less(hd[lt], hl[lt], hd[smallest], hl[smallest]):
            smallest = lt
        if rt < last and _key_less(hd[rt], hl[rt], hd[smallest], hl[smallest]):
            smallest = rt
        if smallest == i:
            break
        hd[i], hd[smallest] = hd[smallest], hd[i]
        hl[i], hl[smallest] = hl[smallest], hl[i]
        hs[i], hs[smallest] = hs[smallest], hs[i]
        i = smallest
    return last


@njit(cache=True)
def _maxheap_push(hd, hl, hs, size, d, lbl, slot):
    i = size
    hd[i] = d
    hl[i] = lbl
    hs[i] = slot
    while i > 0:
        p = (i - 1) >> 1
        if _key_less(hd[p], hl[p], hd[i], hl[i]):
            hd[i], hd[p] = hd[p], hd[i]
            hl[i], hl[p] = hl[p], hl[i]
            hs[i], hs[p] = hs[p], hs[i]
            i = p
        else:
            break
    return size + 1


@njit(cache=True)
def _maxheap_sift_down(hd, hl, hs, size):
    i = 0
    while True:
        lt = 2 * i + 1
        rt = lt + 1
        largest = i
        if lt < size and _key_less(hd[largest], hl[largest], hd[lt], hl[lt]):
            largest = lt
        if rt < size and _key_less(hd[largest], hl[largest], hd[rt], hl[rt]):
            largest = rt
        if largest == i:
            break
        hd[i], hd[largest] = hd[largest], hd[i]
        hl[i], hl[largest] = hl[largest], hl[i]
        hs[i], hs[largest] = hs[largest], hs[i]
        i = largest
    return size


@njit(cache=True)
def _maxheap_pop(hd, hl, hs, size):
    last = size - 1
    hd[0] = hd[last]
    hl[0] = hl[last]
    hs[0] = hs[last]
    return _maxheap_sift_down(hd, hl, hs, last)


@njit(cache=True)
def _maxheap_replace(hd, hl, hs, size, d, lbl, slot):
    hd[0] = d
    hl[0] = lbl
    hs[0] = slot
    return _maxheap_sift_down(hd, hl, hs, size)


# ---------------------------------------------------------------------------
# Graph traversal kernels.
# ---------------------------------------------------------------------------


@njit(cache=True)
def greedy_step(metric, vectors, adj, counts, q, start, start_dist):
    """Greedy walk over one layer: move to the best neighbor until no neighbor
    improves on the current distance. Returns (slot, distance)."""
    cur = start
    cur_dist = start_dist
    improved = True
    while improved:
        improved = False
        row = adj[cur]
        c = counts[cur]
        for j in range(c):
            nb = row[j]
            d = _pair_distance(metric, q, vectors[nb])
            if d < cur_dist:
                cur = nb
                cur_dist = d
                improved = True
    return cur, cur_dist


@njit(cache=True)
def beam_search(metric, vectors, labels, deleted, adj, counts, q, entry_slots,
                ef, live_only):
    """Best-first expansion over one layer's adjacency.

    Keeps at most ``ef`` results. With ``live_only`` the result set only
    accepts slots whose deleted flag is clear, but flagged slots still route:
    they are expanded whenever they are competitive with the current beam.
    Returns (slots, distances) sorted ascending by (distance, label).
    """
    n = vectors.shape[0]
    visited = np.zeros(n, np.uint8)

    # Candidate min-heap; every slot enters at most once so n bounds its size.
    cd = np.empty(n, np.float64)
    cl = np.empty(n, np.int64)
    cs = np.empty(n, np.int64)
    csize = 0
    # Result max-heap of capacity ef (root = current worst kept).
    rd = np.empty(ef, np.float64)
    rl = np.empty(ef, np.int64)
    rs = np.empty(ef, np.int64)
    rsize = 0

    for idx in range(entry_slots.shape[0]):
        s = entry_slots[idx]
        if visited[s]:
            continue
        visited[s] = 1
        d = _pair_distance(metric, q, vectors[s])
        csize = _minheap_push(cd, cl, cs, csize, d, labels[s], s)
        if not live_only or not deleted[s]:
            if rsize < ef:
                rsize = _maxheap_push(rd, rl, rs, rsize, d, labels[s], s)
            elif _key_less(d, labels[s], rd[0], rl[0]):
                _maxheap_replace(rd, rl, rs, rsize, d, labels[s], s)

    while csize > 0:
        d0 = cd[0]
        s0 = cs[0]
        csize = _minheap_pop(cd, cl, cs, csize)
        if rsize >= ef and d0 > rd[0]:
            break
        row = adj[s0]
        c = counts[s0]
        for j in range(c):
            nb = row[j]
            if visited[nb]:
                continue
            visited[nb] = 1
            d = _pair_distance(metric, q, vectors[nb])
            full = rsize >= ef
            if not full or _key_less(d, labels[nb], rd[0], rl[0]):
                csize = _minheap_push(cd, cl, cs, csize, d, labels[nb], nb)
                if not live_only or not deleted[nb]:
                    if not full:
                        rsize = _maxheap_push(rd, rl, rs, rsize, d, labels[nb], nb)
                    else:
                        _maxheap_replace(rd, rl, rs, rsize, d, labels[nb], nb)

    out_slots = np.empty(rsize, np.int64)
    out_dists = np.empty(rsize, np.float64)
    while rsize > 0:
        d0 = rd[0]
        s0 = rs[0]
        rsize = _maxheap_pop(rd, rl, rs, rsize)
        out_slots[rsize] = s0
        out_dists[rsize] = d0
    return out_slots, out_dists


@njit(cache=True)
def occlusion_select(metric, cand_vecs, cand_keys, q, alpha_eff, max_out,
                     exclude_key=-1):
    """Greedy occlusion pruning over a candidate pool.

    Candidates are visited in ascending (distance-to-q, key) order. A visited
    candidate e survives iff alpha_eff * d(s, e) > d(q, e) for every already
    selected s; at most ``max_out`` survive. A candidate whose key equals
    ``exclude_key`` is ignored, which lets callers share one pool across
    selections that each drop a different member. Returns indices into the
    pool in selection order.
    """
    m = cand_vecs.shape[0]
    dq = np.empty(m, np.float64)
    for i in range(m):
        dq[i] = _pair_distance(metric, q, cand_vecs[i])

    order = np.argsort(dq)
    # argsort is not stable across equal distances: reorder ties by key.
    i = 0
    while i < m - 1:
        j = i + 1
        while j < m and dq[order[j]] == dq[order[i]]:
            j += 1
        if j - i > 1:
            for a in range(i + 1, j):
                item = order[a]
                b = a - 1
                while b >= i and cand_keys[order[b]] > cand_keys[item]:
                    order[b + 1] = order[b]
                    b -= 1
                order[b + 1] = item
        i = j

    limit = max_out if max_out < m else m
    kept = np.empty(limit, np.int64)
    occluded = np.zeros(m, np.uint8)
    if exclude_key >= 0:
        for i in range(m):
            if cand_keys[i] == exclude_key:
                occluded[i] = 1
    k = 0
    for pos in range(m):
        i = order[pos]
        if occluded[i]:
            continue
        kept[k] = i
        k += 1
        if k >= limit:
            break
        vi = cand_vecs[i]
        for pos2 in range(pos + 1, m):
            j2 = order[pos2]
            if occluded[j2]:
                continue
            if alpha_eff * _pair_distance(metric, vi, cand_vecs[j2]) <= dq[j2]:
                occluded[j2] = 1
    return kept[:k]
