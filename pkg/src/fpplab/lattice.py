"""Finite boxes of Z^d and reproducible two-valued edge-weight configurations.

A box is an axis-aligned product of integer intervals ``[lo_i, hi_i]``.
Vertices are addressed by absolute lattice coordinates; internally they map
to C-order flat indices of ``coords - lo``. Edges are grouped axis-major:
axis k's edges run from each vertex one step along +k and are indexed in
C-order of their base vertex within the axis-shrunk grid.

Edge weights take one of two integer values {a, b}; each edge's value is a
pure function of ``(seed, replica, edge index)`` (see ``fpplab.rng``), so a
configuration is reproducible bit-for-bit regardless of thread count, and
raising the low-value probability p can only turn b-edges into a-edges
(monotone coupling comes for free).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from fpplab import backend
from fpplab.errors import CapacityError, DomainError
from fpplab.rng import probability_threshold, stream_key

Coords = tuple[int, ...]

INDEX_LIMIT = 2**31 - 1


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned finite box [lo, hi] of Z^d with a designated origin."""

    lo: Coords
    hi: Coords
    origin: Coords | None = None

    def __post_init__(self):
        lo = tuple(int(x) for x in self.lo)
        hi = tuple(int(x) for x in self.hi)
        if len(lo) != len(hi):
            raise DomainError("lo and hi must have the same dimension")
        if len(lo) < 2:
            raise DomainError("dimension must be at least 2")
        if any(l > h for l, h in zip(lo, hi)):
            raise DomainError(f"empty box: lo={lo} hi={hi}")
        origin = self.origin
        origin = tuple(int(x) for x in origin) if origin is not None else (0,) * len(lo)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "origin", origin)
        v = 1
        for l, h in zip(lo, hi):
            v *= h - l + 1
            if v > INDEX_LIMIT:
                raise CapacityError(
                    f"box with extents {self.dims} exceeds the vertex index range"
                )
        if not self.contains(origin):
            raise DomainError(f"origin {origin} lies outside [{lo}, {hi}]")

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def dims(self) -> Coords:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def nvertices(self) -> int:
        return math.prod(self.dims)

    @property
    def strides(self) -> Coords:
        out = []
        s = 1
        for m in reversed(self.dims):
            out.append(s)
            s *= m
        return tuple(reversed(out))

    def axis_edge_count(self, k: int) -> int:
        dims = self.dims
        return math.prod(dims) // dims[k] * (dims[k] - 1)

    @property
    def nedges(self) -> int:
        return sum(self.axis_edge_count(k) for k in range(self.d))

    def edge_offsets(self) -> tuple[int, ...]:
        offs = []
        acc = 0
        for k in range(self.d):
            offs.append(acc)
            acc += self.axis_edge_count(k)
        return tuple(offs)

    def contains(self, v: Coords) -> bool:
        return len(v) == self.d and all(
            l <= x <= h for x, l, h in zip(v, self.lo, self.hi)
        )

    def vertex_index(self, v: Coords) -> int:
        if not self.contains(v):
            raise DomainError(f"vertex {tuple(v)} outside box [{self.lo}, {self.hi}]")
        idx = 0
        for x, l, s in zip(v, self.lo, self.strides):
            idx += (x - l) * s
        return idx

    def vertex_coords(self, idx: int) -> Coords:
        out = []
        for s, l in zip(self.strides, self.lo):
            q, idx = divmod(idx, s)
            out.append(q + l)
        return tuple(out)

    def edge_index(self, e: "EdgeRef") -> int:
        if not 0 <= e.axis < self.d:
            raise DomainError(f"axis {e.axis} outside 0..{self.d - 1}")
        far = tuple(
            x + (1 if k == e.axis else 0) for k, x in enumerate(e.base)
        )
        if not (self.contains(e.base) and self.contains(far)):
            raise DomainError(f"edge {e} not inside box [{self.lo}, {self.hi}]")
        dims = list(self.dims)
        dims[e.axis] -= 1
        idx = 0
        for x, l, m in zip(e.base, self.lo, dims):
            idx = idx * m + (x - l)
        return self.edge_offsets()[e.axis] + idx


class EdgeRef(NamedTuple):
    """Edge from ``base`` one step along +``axis``."""

    base: Coords
    axis: int


@dataclass(frozen=True)
class WeightLaw:
    """Two-valued integer edge-weight law: P(t=a) = p, P(t=b) = 1-p."""

    a: int
    b: int
    p: float

    def __post_init__(self):
        if not (isinstance(self.a, int) and isinstance(self.b, int)):
            raise DomainError("weight values must be integers")
        if self.a < 0 or self.b < self.a:
            raise DomainError(f"need 0 <= a <= b, got a={self.a} b={self.b}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")

    @property
    def is_zero_one(self) -> bool:
        return self.a == 0 and self.b <= 1

    @property
    def alpha(self) -> int:
        """Smallest weight with positive probability."""
        if self.p > 0.0:
            return self.a
        return self.b

    def label(self) -> str:
        return f"({self.a},{self.b},p={self.p:g})"


@dataclass
class Config:
    """One sampled assignment of weights to every edge of a box.

    ``packed`` holds one bit per edge (little-endian within bytes); bit 1
    means the edge drew the low value a. Immutable after creation.
    """

    box: BoxSpec
    law: WeightLaw
    seed: int
    replica: int
    packed: np.ndarray

    def __post_init__(self):
        expected = (self.box.nedges + 7) // 8
        if self.packed.dtype != np.uint8 or self.packed.shape != (expected,):
            raise DomainError("packed weight array has the wrong shape or dtype")
        self.packed.setflags(write=False)

    def edge_bit(self, edge_index: int) -> int:
        return (self.packed[edge_index >> 3] >> (edge_index & 7)) & 1


def sample_config(box: BoxSpec, law: WeightLaw, seed: int, replica: int) -> Config:
    """Draw every edge weight independently: a with probability p, else b."""
    n_edges = box.nedges
    thr = probability_threshold(law.p)
    if thr is None:
        bits = np.full(n_edges, law.p >= 1.0, bool)
        packed = np.packbits(bits, bitorder="little")
    else:
        packed = backend.kernels().fill_weight_bits(
            n_edges, np.uint64(stream_key(seed, replica)), np.uint64(thr)
        )
    return Config(box=box, law=law, seed=int(seed), replica=int(replica), packed=packed)


def edge_weight(cfg: Config, e: EdgeRef) -> int:
    """Weight of one edge; domain error for edges not inside the box."""
    idx = cfg.box.edge_index(e)
    return cfg.law.a if cfg.edge_bit(idx) else cfg.law.b


def config_from_edge_weights(box: BoxSpec, law: WeightLaw, weights,
                             default: int | None = None) -> Config:
    """Build a configuration from explicit edge weights (fixtures, oracles).

    ``weights`` maps EdgeRef -> value; unlisted edges take ``default``
    (law.b when omitted). Every value must be one of the law's two values.
    """
    default = law.b if default is None else default
    values = {}
    for e, w in weights.items():
        e = EdgeRef(tuple(e[0]), int(e[1]))
        values[box.edge_index(e)] = int(w)
    bits = np.zeros(box.nedges, bool)
    for idx in range(box.nedges):
        w = values.get(idx, default)
        if w not in (law.a, law.b):
            raise DomainError(f"weight {w} is not one of the law values {law.a}, {law.b}")
        bits[idx] = w == law.a
    packed = np.packbits(bits, bitorder="little")
    return Config(box=box, law=law, seed=-1, replica=-1, packed=packed)


def low_bit_grids_flat(cfg: Config) -> np.ndarray:
    """Per-axis full-grid uint8 indicators of low-value edges.

    Layout matches the kernels: entry ``k * V + u`` flags the edge from flat
    vertex u along +k; padding entries on an axis's last slice are 0.
    """
    box = cfg.box
    d, V = box.d, box.nvertices
    dims = box.dims
    bits = np.unpackbits(cfg.packed, count=box.nedges, bitorder="little")
    out = np.zeros(d * V, np.uint8)
    offs = box.edge_offsets()
    for k in range(d):
        shrunk = list(dims)
        shrunk[k] = dims[k] - 1
        grid = out[k * V : (k + 1) * V].reshape(dims)
        sl = [slice(None)] * d
        sl[k] = slice(0, dims[k] - 1)
        grid[tuple(sl)] = bits[offs[k] : offs[k] + box.axis_edge_count(k)].reshape(
            shrunk
        )
    return out


def weight_grids_flat(cfg: Config) -> np.ndarray:
    """Per-axis full-grid int32 edge weights (padding reads as b).

    Memoized on the config: several fields per replica share one array.
    """
    cached = cfg.__dict__.get("_wflat")
    if cached is not None:
        return cached
    a, b = cfg.law.a, cfg.law.b
    bits = low_bit_grids_flat(cfg)
    wflat = (b - (b - a) * bits.astype(np.int32)).astype(np.int32)
    wflat.setflags(write=False)
    cfg.__dict__["_wflat"] = wflat
    return wflat


def segment_box(points, margin, origin: Coords | None = None) -> BoxSpec:
    """Smallest box containing ``points`` grown by ``margin`` per axis."""
    pts = [tuple(int(x) for x in p) for p in points]
    if not pts:
        raise DomainError("need at least one point")
    d = len(pts[0])
    if isinstance(margin, int):
        margin = (margin,) * d
    lo = tuple(min(p[k] for p in pts) - margin[k] for k in range(d))
    hi = tuple(max(p[k] for p in pts) + margin[k] for k in range(d))
    return BoxSpec(lo=lo, hi=hi, origin=origin)
