"""numba @njit kernels for the hot loops.

All kernels are exact integer algorithms; ``_kernels_numpy`` implements the
same contracts without numba and must stay bit-identical. Shared layout
conventions:

* a box with per-axis extents ``dims`` (C-order strides) has ``V`` vertices
  addressed by flat index;
* ``wflat`` packs one full-size int32 grid per axis (length ``d * V``);
  entry ``k * V + u`` is the weight of the edge from ``u`` one step along
  axis ``k``. Entries on the last slice of an axis are padding and never
  read.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from fpplab.rng import GOLDEN

_GOLD = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INF32 = np.int32(2**31 - 1)


@njit(cache=True, nogil=True)
def fill_weight_bits(n_edges, key, thr):
    """Bit i is 1 iff edge i draws the low weight; packed little-endian."""
    out = np.zeros((n_edges + 7) // 8, np.uint8)
    k = np.uint64(key)
    t = np.uint64(thr)
    for e in range(n_edges):
        h = k + np.uint64(e + 1) * _GOLD
        h ^= h >> np.uint64(30)
        h *= _M1
        h ^= h >> np.uint64(27)
        h *= _M2
        h ^= h >> np.uint64(31)
        if h < t:
            out[e >> 3] |= np.uint8(1 << (e & 7))
    return out


@njit(cache=True, nogil=True)
def _field_deque01(dims, wflat, sources):
    """Double-ended-queue breadth search for weights in {0, 1}."""
    d = dims.shape[0]
    V = 1
    for k in range(d):
        V *= dims[k]
    strides = np.empty(d, np.int64)
    s = 1
    for k in range(d - 1, -1, -1):
        strides[k] = s
        s *= dims[k]
    E2 = 0
    for k in range(d):
        E2 += 2 * (V // dims[k]) * (dims[k] - 1)
    cap = E2 + V + 8

    dist = np.full(V, _INF32, np.int32)
    dqv = np.empty(cap, np.int32)
    dqd = np.empty(cap, np.int32)
    head = cap // 2
    tail = cap // 2
    for i in range(sources.shape[0]):
        u = sources[i]
        dist[u] = 0
        dqv[tail % cap] = np.int32(u)
        dqd[tail % cap] = 0
        tail += 1

    coords = np.empty(d, np.int64)
    while head < tail:
        slot = head % cap
        u = np.int64(dqv[slot])
        du = dqd[slot]
        head += 1
        if dist[u] != du:
            continue
        r = u
        for k in range(d):
            coords[k] = r // strides[k]
            r -= coords[k] * strides[k]
        base = np.int64(0)
        for k in range(d):
            if coords[k] + 1 < dims[k]:
                v = u + strides[k]
                nd = du + wflat[base + u]
                if nd < dist[v]:
                    dist[v] = nd
                    if nd == du:
                        head -= 1
                        dqv[head % cap] = np.int32(v)
                        dqd[head % cap] = nd
                    else:
                        dqv[tail % cap] = np.int32(v)
                        dqd[tail % cap] = nd
                        tail += 1
            if coords[k] > 0:
                v = u - strides[k]
                nd = du + wflat[base + v]
                if nd < dist[v]:
                    dist[v] = nd
                    if nd == du:
                        head -= 1
                        dqv[head % cap] = np.int32(v)
                        dqd[head % cap] = nd
                    else:
                        dqv[tail % cap] = np.int32(v)
                        dqd[tail % cap] = nd
                        tail += 1
            base += V
    return dist


@njit(cache=True, nogil=True)
def _field_dial(dims, wflat, max_w, sources):
    """Monotone bucket-queue (Dial) search for small integer weights."""
    d = dims.shape[0]
    V = 1
    for k in range(d):
        V *= dims[k]
    strides = np.empty(d, np.int64)
    s = 1
    for k in range(d - 1, -1, -1):
        strides[k] = s
        s *= dims[k]
    E2 = 0
    for k in range(d):
        E2 += 2 * (V // dims[k]) * (dims[k] - 1)
    cap = E2 + V + 8
    span = max_w + 1

    dist = np.full(V, _INF32, np.int32)
    pool_v = np.empty(cap, np.int32)
    pool_next = np.empty(cap, np.int32)
    bucket = np.full(span, np.int32(-1), np.int32)
    nalloc = 0
    npending = 0
    for i in range(sources.shape[0]):
        u = sources[i]
        if dist[u] != 0:
            dist[u] = 0
            pool_v[nalloc] = np.int32(u)
            pool_next[nalloc] = bucket[0]
            bucket[0] = np.int32(nalloc)
            nalloc += 1
            npending += 1

    cur = 0
    coords = np.empty(d, np.int64)
    while npending > 0:
        slot = cur % span
        node = bucket[slot]
        if node == -1:
            cur += 1
            continue
        bucket[slot] = pool_next[node]
        npending -= 1
        u = np.int64(pool_v[node])
        if dist[u] != cur:
            continue
        r = u
        for k in range(d):
            coords[k] = r // strides[k]
            r -= coords[k] * strides[k]
        base = np.int64(0)
        for k in range(d):
            if coords[k] + 1 < dims[k]:
                v = u + strides[k]
                nd = cur + wflat[base + u]
                if nd < dist[v]:
                    dist[v] = nd
                    pool_v[nalloc] = np.int32(v)
                    pool_next[nalloc] = bucket[nd % span]
                    bucket[nd % span] = np.int32(nalloc)
                    nalloc += 1
                    npending += 1
            if coords[k] > 0:
                v = u - strides[k]
                nd = cur + wflat[base + v]
                if nd < dist[v]:
                    dist[v] = nd
                    pool_v[nalloc] = np.int32(v)
                    pool_next[nalloc] = bucket[nd % span]
                    bucket[nd % span] = np.int32(nalloc)
                    nalloc += 1
                    npending += 1
            base += V
    return dist


def shortest_field(dims, wflat, max_weight, zero_one, sources):
    """Exact single/multi-source passage-time field.

    Weights in {0, 1} take the deque search; general {a, b} takes the
    bucket queue keyed by tentative distance.
    """
    if zero_one:
        return _field_deque01(dims, wflat, sources)
    return _field_dial(dims, wflat, max_weight, sources)


@njit(cache=True, nogil=True)
def oriented_reach(nx, ny, open_right, open_up, seeds):
    """Up-right reachability through open edges on an nx-by-ny grid.

    ``open_right[u]`` / ``open_up[u]`` flag the +x / +y edge out of flat
    vertex ``u = i * ny + j``. One lexicographic pass settles the DP since
    every predecessor precedes its successor in C-order.
    """
    reach = np.zeros(nx * ny, np.uint8)
    for i in range(seeds.shape[0]):
        reach[seeds[i]] = 1
    for i in range(nx):
        row = i * ny
        for j in range(ny):
            u = row + j
            if reach[u]:
                continue
            if i > 0 and reach[u - ny] and open_right[u - ny]:
                reach[u] = 1
            elif j > 0 and reach[u - 1] and open_up[u - 1]:
                reach[u] = 1
    return reach
