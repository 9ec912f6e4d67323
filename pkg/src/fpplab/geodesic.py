"""Exact passage-time fields and the geometry of optimal paths.

Everything here is exact integer arithmetic on one sampled configuration:
single/multi-source fields, point-to-point and point-to-plane times, a
minimum-hop optimal path, and the union of all optimal paths between two
vertices.

The union is computed by the distance-sum criterion: with a forward field
T_f from the source and a backward field T_b from the target, a vertex w
belongs iff T_f(w) + T_b(w) equals the optimum, and an edge (u, v) belongs
iff some orientation satisfies T_f(u) + t(e) + T_b(v) = optimum. With
zero-weight edges this is a superset of the union of self-avoiding optimal
paths (a zero-weight appendage hanging off a geodesic satisfies the
criterion but lies on no self-avoiding optimal path); the exact union is
available at tiny scale through ``brute_force_union``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from fpplab import backend
from fpplab.errors import CapacityError, DomainError
from fpplab.lattice import (
    BoxSpec,
    Config,
    Coords,
    EdgeRef,
    edge_weight,
    weight_grids_flat,
)

BRUTE_FORCE_LIMIT = 25


def _config_key(cfg: Config):
    return (cfg.box, cfg.law, cfg.seed, cfg.replica)


@dataclass
class DistField:
    """Exact passage times from a source set to every vertex of the box."""

    cfg: Config
    sources: tuple[Coords, ...]
    dist: np.ndarray  # int32, shaped like the box

    def __post_init__(self):
        self.dist.setflags(write=False)

    def at(self, v: Coords) -> int:
        box = self.cfg.box
        if not box.contains(v):
            raise DomainError(f"vertex {tuple(v)} outside box")
        return int(self.dist[tuple(x - l for x, l in zip(v, box.lo))])


def distance_field(cfg: Config, sources) -> DistField:
    """Shortest passage times within the box from a nonempty source set."""
    box = cfg.box
    srcs = tuple(tuple(int(x) for x in s) for s in sources)
    if not srcs:
        raise DomainError("empty source set")
    flat = np.array([box.vertex_index(s) for s in srcs], np.int64)
    wflat = weight_grids_flat(cfg)
    dims = np.array(box.dims, np.int64)
    dist = backend.kernels().shortest_field(
        dims, wflat, cfg.law.b, cfg.law.is_zero_one, flat
    )
    return DistField(cfg=cfg, sources=srcs, dist=dist.reshape(box.dims))


def point_time(cfg: Config, u: Coords, v: Coords) -> int:
    """Passage time between two vertices of the box."""
    f = distance_field(cfg, [u])
    return f.at(v)


def plane_time(cfg: Config, src: Coords, i: int) -> int:
    """Minimal passage time from src to the hyperplane x_1 = i."""
    box = cfg.box
    if not box.lo[0] <= i <= box.hi[0]:
        raise DomainError(f"plane x1={i} does not intersect the box")
    f = distance_field(cfg, [src])
    return int(f.dist[i - box.lo[0]].min())


@dataclass
class GeodesicSet:
    """Vertex/edge membership of the union of optimal paths src -> dst."""

    cfg: Config
    src: Coords
    dst: Coords
    value: int
    vertex_mask: np.ndarray  # bool, shaped like the box
    edge_masks: tuple[np.ndarray, ...]  # bool, axis-shrunk shapes
    criterion: str
    fwd: DistField | None = None
    bwd: DistField | None = None

    @property
    def vertex_count(self) -> int:
        return int(self.vertex_mask.sum())

    @property
    def edge_count(self) -> int:
        return int(sum(m.sum() for m in self.edge_masks))

    def contains_vertex(self, v: Coords) -> bool:
        box = self.cfg.box
        return box.contains(v) and bool(
            self.vertex_mask[tuple(x - l for x, l in zip(v, box.lo))]
        )

    def member_coords(self) -> np.ndarray:
        """(m, d) array of member vertex coordinates."""
        idx = np.argwhere(self.vertex_mask)
        return idx + np.array(self.cfg.box.lo)

    def is_subset_of(self, other: "GeodesicSet") -> bool:
        """Vertex- and edge-wise containment."""
        if np.any(self.vertex_mask & ~other.vertex_mask):
            return False
        return not any(
            np.any(a & ~b) for a, b in zip(self.edge_masks, other.edge_masks)
        )


def geodesic_union(cfg: Config, src: Coords, dst: Coords,
                   fwd: DistField | None = None,
                   bwd: DistField | None = None) -> GeodesicSet:
    """Distance-sum criterion set for the union of optimal paths.

    Accepts precomputed forward/backward fields (they must come from this
    cfg with sources {src} and {dst} respectively) to avoid recomputation.
    """
    box = cfg.box
    src = tuple(int(x) for x in src)
    dst = tuple(int(x) for x in dst)
    f = fwd if fwd is not None else distance_field(cfg, [src])
    b = bwd if bwd is not None else distance_field(cfg, [dst])
    if f.sources != (src,) or b.sources != (dst,):
        raise DomainError("precomputed fields do not match src/dst")
    opt = f.at(dst)
    total = f.dist.astype(np.int64) + b.dist.astype(np.int64)
    vmask = total == opt
    wflat = weight_grids_flat(cfg)
    d, V = box.d, box.nvertices
    emasks = []
    for k in range(d):
        sl_u = [slice(None)] * d
        sl_u[k] = slice(0, box.dims[k] - 1)
        sl_v = [slice(None)] * d
        sl_v[k] = slice(1, box.dims[k])
        w = wflat[k * V : (k + 1) * V].reshape(box.dims)[tuple(sl_u)].astype(np.int64)
        fu = f.dist[tuple(sl_u)].astype(np.int64)
        fv = f.dist[tuple(sl_v)].astype(np.int64)
        bu = b.dist[tuple(sl_u)].astype(np.int64)
        bv = b.dist[tuple(sl_v)].astype(np.int64)
        emasks.append((np.minimum(fu + bv, fv + bu) + w) == opt)
    return GeodesicSet(
        cfg=cfg,
        src=src,
        dst=dst,
        value=opt,
        vertex_mask=vmask,
        edge_masks=tuple(emasks),
        criterion="distance-sum",
        fwd=f,
        bwd=b,
    )


def _adjacency(cfg: Config):
    """Per-vertex neighbor list [(nbr_index, weight, edge_base, axis)]."""
    box = cfg.box
    adj = [[] for _ in range(box.nvertices)]
    for axis in range(box.d):
        ranges = [
            range(box.lo[k], box.hi[k] + (0 if k == axis else 1))
            for k in range(box.d)
        ]
        for base in itertools.product(*ranges):
            far = tuple(x + (1 if k == axis else 0) for k, x in enumerate(base))
            w = edge_weight(cfg, EdgeRef(base, axis))
            ui, vi = box.vertex_index(base), box.vertex_index(far)
            adj[ui].append((vi, w, base, axis))
            adj[vi].append((ui, w, base, axis))
    return adj


def brute_force_union(cfg: Config, src: Coords, dst: Coords) -> GeodesicSet:
    """Exact union of all self-avoiding optimal paths, by enumeration.

    Exponential in the box size; restricted to boxes with at most
    ``BRUTE_FORCE_LIMIT`` vertices. Oracle for ``geodesic_union``.
    """
    box = cfg.box
    if box.nvertices > BRUTE_FORCE_LIMIT:
        raise CapacityError(
            f"brute force limited to {BRUTE_FORCE_LIMIT} vertices, box has {box.nvertices}"
        )
    src = tuple(int(x) for x in src)
    dst = tuple(int(x) for x in dst)
    src_i = box.vertex_index(src)
    dst_i = box.vertex_index(dst)
    adj = _adjacency(cfg)

    vmask = np.zeros(box.nvertices, bool)
    emasks = []
    for k in range(box.d):
        shape = list(box.dims)
        shape[k] -= 1
        emasks.append(np.zeros(tuple(shape), bool))

    best = None
    collect = False
    path_vertices = [src_i]
    path_edges = []  # (axis, base relative to lo)
    on_path = {src_i}

    def search(u, cost):
        nonlocal best
        if best is not None and cost > best:
            return
        if u == dst_i:
            if not collect:
                best = cost
            elif cost == best:
                for w in path_vertices:
                    vmask[w] = True
                for axis, rb in path_edges:
                    emasks[axis][rb] = True
            return
        for v, w, base, axis in adj[u]:
            if v in on_path:
                continue
            on_path.add(v)
            path_vertices.append(v)
            path_edges.append((axis, tuple(x - l for x, l in zip(base, box.lo))))
            search(v, cost + w)
            path_edges.pop()
            path_vertices.pop()
            on_path.remove(v)

    search(src_i, 0)
    if best is None:
        raise RuntimeError("no path found; box should be connected")
    collect = True
    search(src_i, 0)

    return GeodesicSet(
        cfg=cfg,
        src=src,
        dst=dst,
        value=int(best),
        vertex_mask=vmask.reshape(box.dims),
        edge_masks=tuple(emasks),
        criterion="brute-force",
    )


@dataclass
class Path:
    """A self-avoiding path with its passage time and hop count."""

    vertices: tuple[Coords, ...]
    edges: tuple[EdgeRef, ...]
    time: int
    hops: int


def extract_path(cfg: Config, src: Coords, dst: Coords, tie_rule: str = "min-hops") -> Path:
    """One optimal path minimizing hop count among optimal paths.

    Deterministic: breadth-first search over the steps that stay optimal
    (T_f(u) + t(e) + T_b(v) = optimum), offering neighbors by ascending
    axis with the negative direction first, so ties resolve identically
    on every run.
    """
    if tie_rule != "min-hops":
        raise DomainError(f"unsupported tie rule {tie_rule!r}")
    box = cfg.box
    src = tuple(int(x) for x in src)
    dst = tuple(int(x) for x in dst)
    f = distance_field(cfg, [src])
    b = distance_field(cfg, [dst])
    opt = f.at(dst)
    src_i = box.vertex_index(src)
    dst_i = box.vertex_index(dst)
    fd = f.dist.reshape(-1)
    bd = b.dist.reshape(-1)
    wflat = weight_grids_flat(cfg)
    V = box.nvertices
    strides = box.strides
    dims = box.dims

    parent = np.full(V, -1, np.int64)
    seen = np.zeros(V, bool)
    seen[src_i] = True
    q = deque([src_i])
    while q:
        u = int(q.popleft())
        if u == dst_i:
            break
        rem = u
        coords = []
        for s in strides:
            c, rem = divmod(rem, s)
            coords.append(c)
        for k in range(box.d):
            for step in (-1, 1):
                c = coords[k] + step
                if not 0 <= c < dims[k]:
                    continue
                v = u + step * strides[k]
                base = u if step == 1 else v
                w = int(wflat[k * V + base])
                if seen[v] or fd[u] + w + bd[v] != opt:
                    continue
                seen[v] = True
                parent[v] = u
                q.append(v)

    verts_flat = [dst_i]
    while verts_flat[-1] != src_i:
        p = int(parent[verts_flat[-1]])
        if p < 0:
            raise RuntimeError("path reconstruction failed")
        verts_flat.append(p)
    verts_flat.reverse()
    verts = [box.vertex_coords(i) for i in verts_flat]
    edges = []
    for a, bb in zip(verts, verts[1:]):
        axis = next(k for k in range(box.d) if a[k] != bb[k])
        base = a if a[axis] < bb[axis] else bb
        edges.append(EdgeRef(tuple(base), axis))
    return Path(
        vertices=tuple(verts), edges=tuple(edges), time=int(opt), hops=len(edges)
    )


def truncation_check(fwd: DistField, bwd: DistField) -> bool:
    """True iff no optimal src->dst path can leave the box.

    Checks min over box-boundary vertices of T_f + T_b against the optimum;
    strict excess certifies that box results equal infinite-lattice results
    for this pair.
    """
    if _config_key(fwd.cfg) != _config_key(bwd.cfg):
        raise DomainError("fields computed on different configurations")
    if len(bwd.sources) != 1 or len(fwd.sources) != 1:
        raise DomainError("truncation check needs single-source fields")
    dst = bwd.sources[0]
    opt = fwd.at(dst)
    total = fwd.dist.astype(np.int64) + bwd.dist.astype(np.int64)
    d = fwd.cfg.box.d
    m = None
    for k in range(d):
        for face in (0, -1):
            sl = [slice(None)] * d
            sl[k] = face
            fm = int(total[tuple(sl)].min())
            m = fm if m is None else min(m, fm)
    return m > opt


def reference_distance_field(cfg: Config, sources) -> np.ndarray:
    """Independent quadratic-scan shortest-path oracle (int64 array).

    Plain Bellman relaxation over an explicit edge list, with per-edge
    weights decoded through the scalar ``edge_weight`` path; shares no
    algorithm or decoding shortcut with the production kernels.
    """
    box = cfg.box
    INF = 1 << 40
    dist = [INF] * box.nvertices
    for s in sources:
        dist[box.vertex_index(s)] = 0
    edges = []
    for axis in range(box.d):
        ranges = [
            range(box.lo[k], box.hi[k] + (0 if k == axis else 1))
            for k in range(box.d)
        ]
        for base in itertools.product(*ranges):
            far = tuple(x + (1 if k == axis else 0) for k, x in enumerate(base))
            edges.append(
                (
                    box.vertex_index(base),
                    box.vertex_index(far),
                    edge_weight(cfg, EdgeRef(base, axis)),
                )
            )
    changed = True
    while changed:
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
    return np.array(dist, np.int64).reshape(box.dims)
