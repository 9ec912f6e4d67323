"""Counter-based random bits for edge weights.

Every edge weight is a pure function of ``(seed, replica, edge_index)``:
a splitmix64-style stream keyed by ``(seed, replica)`` is evaluated at the
edge's counter position and compared against a 64-bit threshold. No state
is carried between edges, so any weight can be recomputed independently
and sampling order (or thread count) cannot change the result.

The same arithmetic is implemented three times: here in pure python (the
reference used by tests), vectorized in ``_kernels_numpy``, and as an
``@njit`` loop in ``_kernels_numba``. All three are bit-identical.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
REPLICA_MULT = 0xD2B74407B1CE6E93


def mix64(z: int) -> int:
    """splitmix64 finalizer (a bijection on 64-bit words)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def stream_key(seed: int, replica: int) -> int:
    """64-bit stream key for a (seed, replica) pair."""
    return mix64(mix64((seed + GOLDEN) & MASK64) ^ ((replica * REPLICA_MULT) & MASK64))


def edge_hash(seed: int, replica: int, edge_index: int) -> int:
    """Uniform 64-bit value for one edge of one replica."""
    key = stream_key(seed, replica)
    return mix64((key + (edge_index + 1) * GOLDEN) & MASK64)


def probability_threshold(p: float) -> int | None:
    """Map p in (0,1) to the uint64 threshold with P(hash < thr) = p.

    Returns None for the degenerate ends; callers handle p <= 0 (no low
    edges) and p >= 1 (all low edges) without hashing.
    """
    if p <= 0.0 or p >= 1.0:
        return None
    thr = int(p * 2.0**64)
    # guard against float rounding pinning an interior p to the ends
    return min(max(thr, 1), MASK64)


def derive_seed(seed: int, tag: str) -> int:
    """Stable sub-seed for a named sub-experiment."""
    h = 0
    for ch in tag.encode("utf-8"):
        h = mix64((h * 0x100000001B3 + ch) & MASK64)
    return mix64((seed & MASK64) ^ h)
