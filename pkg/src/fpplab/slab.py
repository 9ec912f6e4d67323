"""Geometry of the geodesic union: heights, slab restrictions, exits.

The height of a union is the maximal Euclidean distance from its member
vertices to the straight line through source and target. Distances are
compared through exact integer squared cross products (a common float
denominator would risk ties resolving differently across platforms) and
converted to a real number only for reporting.

Heights and slab counts are computed on the distance-sum criterion set,
a superset of the true union of self-avoiding optimal paths; the
over-approximation can only inflate the height, which makes decreasing
height-ratio findings conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from fpplab.errors import DomainError
from fpplab.geodesic import GeodesicSet, distance_field, geodesic_union, truncation_check
from fpplab.lattice import Config, Coords, WeightLaw, sample_config, segment_box
from fpplab.parallel import replica_map
from fpplab.rng import derive_seed
from fpplab.shape import Direction, default_margin


@dataclass(frozen=True)
class SlabSpec:
    """Closed interval [lo, hi] of hyperplane indices along the first axis."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"slab interval [{self.lo}, {self.hi}] is empty")

    @property
    def planes(self) -> range:
        return range(self.lo, self.hi + 1)


def height_sq(union: GeodesicSet) -> tuple[int, int]:
    """Exact squared height as (numerator, denominator).

    numerator / denominator = max over members of the squared distance to
    the line through src and dst; both are plain ints.
    """
    src = np.array(union.src, np.int64)
    dst = np.array(union.dst, np.int64)
    x = dst - src
    x2 = int((x * x).sum())
    if x2 == 0:
        raise DomainError("height needs distinct source and target")
    u = union.member_coords().astype(np.int64) - src
    u2 = (u * u).sum(axis=1)
    ux = u @ x
    cross2 = u2 * x2 - ux * ux
    return int(cross2.max()), x2


def height(cfg: Config, src: Coords, dst: Coords, union: GeodesicSet | None = None) -> float:
    """Max distance of the optimal-path union from the src-dst line."""
    if union is None:
        union = geodesic_union(cfg, src, dst)
    num, den = height_sq(union)
    return math.sqrt(num) / math.sqrt(den)


def restrict_to_slab(union: GeodesicSet, lo_plane: int, hi_plane: int) -> GeodesicSet:
    """Members with first coordinate in [lo_plane, hi_plane].

    Edges are kept when both endpoints lie in the slab.
    """
    box = union.cfg.box
    lo_idx = max(lo_plane, box.lo[0]) - box.lo[0]
    hi_idx = min(hi_plane, box.hi[0]) - box.lo[0]
    vmask = np.zeros_like(union.vertex_mask)
    if lo_idx <= hi_idx:
        vmask[lo_idx : hi_idx + 1] = union.vertex_mask[lo_idx : hi_idx + 1]
    emasks = []
    for k, m in enumerate(union.edge_masks):
        e = np.zeros_like(m)
        if lo_idx <= hi_idx:
            if k == 0:
                e[lo_idx : hi_idx] = m[lo_idx : hi_idx]
            else:
                e[lo_idx : hi_idx + 1] = m[lo_idx : hi_idx + 1]
        emasks.append(e)
    return GeodesicSet(
        cfg=union.cfg, src=union.src, dst=union.dst, value=union.value,
        vertex_mask=vmask, edge_masks=tuple(emasks),
        criterion=union.criterion, fwd=union.fwd, bwd=union.bwd,
    )


def slab_interval(src: Coords, dst: Coords, kappa: float, preset: str = "mid") -> SlabSpec:
    """Plane interval of width kappa * n, exact in rational arithmetic.

    ``mid`` ends at the halfway plane, ``end`` at the target plane; n is
    the x1 extent of (src, dst).
    """
    if not 0.0 < kappa < 0.5:
        raise DomainError("kappa must be in (0, 1/2)")
    n = dst[0] - src[0]
    if n <= 0:
        raise DomainError("slab geometry needs dst strictly right of src along x1")
    kf = Fraction(kappa)
    if preset == "mid":
        hi = Fraction(src[0]) + Fraction(n, 2)
    elif preset == "end":
        hi = Fraction(src[0] + n)
    else:
        raise DomainError(f"unknown slab preset {preset!r}")
    lo = hi - kf * n
    return SlabSpec(lo=math.ceil(lo), hi=math.floor(hi))


@dataclass
class SlabUnion:
    union: GeodesicSet
    slab: SlabSpec
    cardinality: int


def slab_union(cfg: Config, src: Coords, dst: Coords, kappa: float, *,
               preset: str = "mid", union: GeodesicSet | None = None) -> SlabUnion:
    """Union restricted to the kappa-slab; cardinality is the vertex count."""
    spec = slab_interval(src, dst, kappa, preset)
    if union is None:
        union = geodesic_union(cfg, src, dst)
    sub = restrict_to_slab(union, spec.lo, spec.hi)
    return SlabUnion(union=sub, slab=spec, cardinality=sub.vertex_count)


@dataclass(frozen=True)
class ExitReport:
    """Per-hyperplane crossing counts of the union over a slab."""

    slab: SlabSpec
    counts: tuple[int, ...]
    min_plane: int
    min_count: int
    exit_vertices: tuple[Coords, ...]

    @property
    def all_planes_crossed(self) -> bool:
        return all(c >= 1 for c in self.counts)


def exits(cfg: Config, src: Coords, dst: Coords, slab: SlabSpec, *,
          union: GeodesicSet | None = None) -> ExitReport:
    """Count union vertices on each plane of the slab; report the thinnest.

    The minimal-count plane (lowest index on ties) carries the exit
    vertices: every optimal path crosses the slab through one of them.
    """
    box = cfg.box
    if not (src[0] <= slab.lo and slab.hi <= dst[0]):
        raise DomainError(
            f"slab [{slab.lo}, {slab.hi}] not between source plane {src[0]} "
            f"and target plane {dst[0]}"
        )
    if slab.lo < box.lo[0] or slab.hi > box.hi[0]:
        raise DomainError("slab extends outside the box")
    if union is None:
        union = geodesic_union(cfg, src, dst)
    counts = []
    for i in slab.planes:
        counts.append(int(union.vertex_mask[i - box.lo[0]].sum()))
    arr = np.array(counts)
    amin = int(arr.argmin())
    min_plane = slab.lo + amin
    plane_mask = union.vertex_mask[min_plane - box.lo[0]]
    rest = np.argwhere(plane_mask) + np.array(box.lo[1:])
    exit_vertices = tuple((min_plane, *map(int, row)) for row in rest)
    return ExitReport(
        slab=slab,
        counts=tuple(counts),
        min_plane=min_plane,
        min_count=int(arr.min()),
        exit_vertices=exit_vertices,
    )


def union_box(x: Direction, n: int, margin_scale: float):
    target = x.scaled(n)
    span = sum(abs(v) for v in target)
    return segment_box([(0,) * x.d, target], default_margin(span, margin_scale)), target


def height_replica(law: WeightLaw, x: Direction, n: int, seed: int, replica: int,
                   margin_scale: float = 2.2) -> dict:
    """One replica's height (exact pieces) with its truncation certificate."""
    box, target = union_box(x, n, margin_scale)
    cfg = sample_config(box, law, seed, replica)
    src = (0,) * x.d
    f = distance_field(cfg, [src])
    b = distance_field(cfg, [target])
    gs = geodesic_union(cfg, src, target, fwd=f, bwd=b)
    num, den = height_sq(gs)
    return {"h2_num": num, "h2_den": den, "ok": truncation_check(f, b)}


def exits_replica(law: WeightLaw, x: Direction, n: int, slab: SlabSpec,
                  seed: int, replica: int, margin_scale: float = 2.2) -> dict:
    """Exit counts of one replica over a fixed slab."""
    box, target = union_box(x, n, margin_scale)
    cfg = sample_config(box, law, seed, replica)
    src = (0,) * x.d
    f = distance_field(cfg, [src])
    b = distance_field(cfg, [target])
    gs = geodesic_union(cfg, src, target, fwd=f, bwd=b)
    report = exits(cfg, src, target, slab, union=gs)
    return {
        "min": report.min_count,
        "crossed": report.all_planes_crossed,
        "ok": truncation_check(f, b),
    }


def union_size_replica(law: WeightLaw, x: Direction, n: int, kappa: float,
                       seed: int, replica: int, margin_scale: float = 2.2) -> dict:
    """Union size, mid-slab size, and end-slab exit counts for one replica."""
    box, target = union_box(x, n, margin_scale)
    cfg = sample_config(box, law, seed, replica)
    src = (0,) * x.d
    f = distance_field(cfg, [src])
    b = distance_field(cfg, [target])
    gs = geodesic_union(cfg, src, target, fwd=f, bwd=b)
    mid = slab_union(cfg, src, target, kappa, preset="mid", union=gs)
    end_spec = slab_interval(src, target, kappa, preset="end")
    report = exits(cfg, src, target, end_spec, union=gs)
    return {
        "union": gs.vertex_count,
        "slab": mid.cardinality,
        "exit_min": report.min_count,
        "crossed": report.all_planes_crossed,
        "ok": truncation_check(f, b),
    }


@dataclass(frozen=True)
class HeightScanRow:
    n: int
    R: int
    included: int
    mean_h: float
    median_h: float
    max_h: float
    mean_ratio: float
    median_ratio: float
    trunc_failures: int
    heights: tuple[float, ...]


@dataclass(frozen=True)
class ExponentFit:
    """log-log least-squares slope of median height vs scale; descriptive."""

    exponent: float
    stderr: float
    r2: float
    n_used: int


@dataclass(frozen=True)
class HeightScan:
    law: WeightLaw
    direction: Direction
    rows: tuple[HeightScanRow, ...]
    fit: ExponentFit | None


def aggregate_heights(n: int, R: int, records) -> HeightScanRow:
    hs = [math.sqrt(r["h2_num"]) / math.sqrt(r["h2_den"]) for r in records if r["ok"]]
    failures = sum(1 for r in records if not r["ok"])
    if not hs:
        raise DomainError("no replica survived truncation")
    arr = np.array(hs)
    return HeightScanRow(
        n=n, R=R, included=len(hs),
        mean_h=float(arr.mean()), median_h=float(np.median(arr)),
        max_h=float(arr.max()),
        mean_ratio=float(arr.mean()) / n, median_ratio=float(np.median(arr)) / n,
        trunc_failures=failures, heights=tuple(float(h) for h in arr),
    )


def fit_height_exponent(rows) -> ExponentFit | None:
    pts = [(r.n, r.median_h) for r in rows if r.median_h > 0]
    if len(pts) < 3:
        return None
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    (slope, intercept), cov = np.polyfit(lx, ly, 1, cov=True)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(
        exponent=float(slope), stderr=float(math.sqrt(max(cov[0, 0], 0.0))),
        r2=r2, n_used=len(pts),
    )


def height_scan(law: WeightLaw, x, n_list, R: int, seed: int, *,
                margin_scale: float = 2.2, threads: int = 1,
                fit: bool = True) -> HeightScan:
    """Height statistics across scales, with an optional exponent fit."""
    x = Direction.of(x)
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("n_list must be strictly increasing")
    rows = []
    for n in ns:
        sub = derive_seed(seed, f"height:{n}")
        records = replica_map(
            lambda r: height_replica(law, x, n, sub, r, margin_scale),
            range(R), threads,
        )
        rows.append(aggregate_heights(n, R, records))
    return HeightScan(
        law=law, direction=x, rows=tuple(rows),
        fit=fit_height_exponent(rows) if fit else None,
    )
