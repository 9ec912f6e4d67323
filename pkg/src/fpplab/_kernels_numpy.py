"""Pure-numpy fallbacks for the hot kernels (no numba required).

Same contracts and bit-identical outputs as ``_kernels_numba``. The field
solver here is a Gauss-Seidel sweep of exact min-plus line relaxations
(prefix scans along each axis, iterated to the fixed point) instead of a
label-setting queue; it is asymptotically slower but fully vectorized.
"""

from __future__ import annotations

import numpy as np

from fpplab.rng import GOLDEN

_GOLD = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INF = np.int64(1) << np.int64(40)


def fill_weight_bits(n_edges, key, thr):
    """Bit i is 1 iff edge i draws the low weight; packed little-endian."""
    with np.errstate(over="ignore"):
        h = np.uint64(key) + np.arange(1, n_edges + 1, dtype=np.uint64) * _GOLD
        h ^= h >> np.uint64(30)
        h *= _M1
        h ^= h >> np.uint64(27)
        h *= _M2
        h ^= h >> np.uint64(31)
        bits = h < np.uint64(thr)
    return np.packbits(bits, bitorder="little")


def _relax_axis(D, W):
    """One exact bidirectional min-plus relaxation along the last axis.

    D has shape (..., m); W holds the m-1 edge weights per line. Forward:
    D[j] <- min_{i<=j} D[i] + sum(W[i:j]); backward symmetric. Both reduce
    to running minima against prefix sums.
    """
    m = D.shape[-1]
    P = np.zeros(D.shape, np.int64)
    np.cumsum(W, axis=-1, out=P[..., 1:])
    A = np.minimum.accumulate(D - P, axis=-1) + P
    B = np.flip(np.minimum.accumulate(np.flip(D + P, -1), axis=-1), -1) - P
    return np.minimum(np.minimum(A, B), D)


def shortest_field(dims, wflat, max_weight, zero_one, sources):
    """Exact passage-time field by iterated line sweeps to a fixed point."""
    dims = tuple(int(x) for x in dims)
    d = len(dims)
    V = int(np.prod(dims))
    dist = np.full(V, _INF, np.int64)
    dist[sources] = 0
    D = dist.reshape(dims)
    wgrids = []
    for k in range(d):
        g = wflat[k * V : (k + 1) * V].astype(np.int64).reshape(dims)
        sl = [slice(None)] * d
        sl[k] = slice(0, dims[k] - 1)
        wgrids.append(np.moveaxis(g[tuple(sl)], k, -1))
    while True:
        changed = False
        for k in range(d):
            Dm = np.moveaxis(D, k, -1)
            new = _relax_axis(Dm, wgrids[k])
            if not np.array_equal(new, Dm):
                changed = True
                Dm[...] = new
        if not changed:
            break
    return D.reshape(-1).astype(np.int32)


def oriented_reach(nx, ny, open_right, open_up, seeds):
    """Up-right reachability; row recurrence solved with a segmented scan."""
    reach = np.zeros(nx * ny, bool)
    reach[seeds] = True
    R = reach.reshape(nx, ny)
    right = open_right.reshape(nx, ny).astype(bool)
    up = open_up.reshape(nx, ny).astype(bool)
    run_id = np.empty(ny, np.int64)
    pos = np.arange(ny)
    for i in range(nx):
        row = R[i].copy()
        if i > 0:
            row |= R[i - 1] & right[i - 1]
        # propagate along +y through open up-edges: row[j] is reachable iff
        # some row[k] holds with k <= j inside the same run of open edges,
        # i.e. iff the latest reachable k so far shares j's run id.
        run_id[0] = 0
        np.cumsum(~up[i, : ny - 1], out=run_id[1:])
        last = np.where(row, pos, -1)
        np.maximum.accumulate(last, out=last)
        R[i] = (last >= 0) & (run_id[np.maximum(last, 0)] == run_id)
    return R.reshape(-1).astype(np.uint8)
