"""Monte Carlo estimation of the time constant and probes of the limit shape.

Estimates are means over independent replicas of exact integer passage
times; every replica is certified by the truncation check (an optimal path
that could leave the finite box would bias the estimate), and failed
replicas are dropped and counted rather than clamped.

The flat-edge probe measures the midpoint-convexity defect of the
per-direction passage time along a chord: with common random numbers, each
replica contributes [T(0, n x1) + T(0, n x2) - 2 T(0, n (x1+x2)/2)] / (2n),
whose expectation converges to (mu(x1) + mu(x2))/2 - mu((x1+x2)/2). A flat
boundary segment through the chord's midpoint direction is equivalent to a
zero asymptotic defect, strict convexity to a positive one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from fpplab.errors import DomainError, EstimationError
from fpplab.geodesic import distance_field, truncation_check
from fpplab.lattice import BoxSpec, Config, Coords, WeightLaw, sample_config, segment_box
from fpplab.parallel import replica_map
from fpplab.rng import derive_seed

# statistical convention used everywhere: an estimate is "positive" when it
# exceeds 3 standard errors, "zero" when it lies within 3 standard errors.
SIGMA_FACTOR = 3.0


@dataclass(frozen=True)
class Direction:
    """Integer lattice direction in lowest terms.

    Canonical form: coordinates divided by their gcd, sign flipped so the
    first nonzero coordinate is positive (lattice symmetries make the
    per-direction passage time invariant under the flip).
    """

    vec: Coords

    def __post_init__(self):
        v = tuple(int(x) for x in self.vec)
        if len(v) < 2 or all(x == 0 for x in v):
            raise DomainError(f"direction must be a nonzero vector, got {v}")
        g = math.gcd(*(abs(x) for x in v))
        v = tuple(x // g for x in v)
        first = next(x for x in v if x != 0)
        if first < 0:
            v = tuple(-x for x in v)
        object.__setattr__(self, "vec", v)

    @classmethod
    def of(cls, v) -> "Direction":
        return v if isinstance(v, Direction) else cls(tuple(v))

    @property
    def d(self) -> int:
        return len(self.vec)

    @property
    def norm1(self) -> int:
        return sum(abs(x) for x in self.vec)

    @property
    def norm2(self) -> float:
        return math.sqrt(sum(x * x for x in self.vec))

    @property
    def norminf(self) -> int:
        return max(abs(x) for x in self.vec)

    def scaled(self, n: int) -> Coords:
        return tuple(n * x for x in self.vec)

    def __str__(self):
        return ",".join(str(x) for x in self.vec)


def default_margin(l1_span: int, scale: float = 2.2) -> int:
    """Box margin for a segment of L1 length l1_span.

    Transversal geodesic wander grows like the 2/3 power of the distance,
    so the margin follows that scale, floored for tiny boxes and capped to
    keep memory bounded. Truncation failures are counted downstream, so an
    occasionally insufficient margin is detected, not silently tolerated.
    """
    return max(16, min(320, round(scale * l1_span ** (2.0 / 3.0))))


def _origin(d: int) -> Coords:
    return (0,) * d


def mu_box(law: WeightLaw, target: Coords, margin_scale: float) -> BoxSpec:
    span = sum(abs(x) for x in target)
    return segment_box([_origin(len(target)), target], default_margin(span, margin_scale))


def _value_certified(cfg, f, target, value: int) -> bool:
    """Is the box passage time provably the infinite-lattice one?

    Either the value attains the universal lower bound a * L1 (no path,
    inside or outside the box, can beat it), or the strict boundary-excess
    truncation check holds. Only the value is certified this way; union
    membership needs the strict check alone.
    """
    src = f.sources[0]
    l1 = sum(abs(t - s) for t, s in zip(target, src))
    if value == cfg.law.a * l1:
        return True
    return truncation_check(f, distance_field(cfg, [target]))


def mu_replica(law: WeightLaw, x: Direction, n: int, seed: int, replica: int,
               margin_scale: float = 2.2) -> dict:
    """One replica of T(0, n x) with its exactness certificate."""
    target = x.scaled(n)
    box = mu_box(law, target, margin_scale)
    cfg = sample_config(box, law, seed, replica)
    f = distance_field(cfg, [_origin(x.d)])
    value = int(f.at(target))
    return {"T": value, "ok": _value_certified(cfg, f, target, value)}


@dataclass(frozen=True)
class MuEstimate:
    """Monte Carlo estimate of the per-direction time constant."""

    law: WeightLaw
    direction: Direction
    n: int
    R: int
    included: int
    mean: float  # mean of T(0, n x)/n over included replicas
    se: float
    per_unit: float  # mean / |x|_2, i.e. per unit Euclidean length
    trunc_failures: int
    values: tuple[int, ...]  # raw passage times of included replicas

    def ratios(self) -> np.ndarray:
        return np.array(self.values, np.int64) / self.n


def aggregate_mu(law: WeightLaw, x: Direction, n: int, R: int, records) -> MuEstimate:
    Ts = [r["T"] for r in records if r["ok"]]
    failures = sum(1 for r in records if not r["ok"])
    if len(Ts) == 0:
        raise EstimationError(
            "every replica failed the truncation check; the box is too small"
        )
    if len(Ts) < 2:
        raise EstimationError("fewer than two replicas survived truncation")
    arr = np.array(Ts, np.int64)
    mean = float(arr.sum()) / (len(arr) * n)
    se = float(np.std(arr / n, ddof=1) / math.sqrt(len(arr)))
    return MuEstimate(
        law=law,
        direction=x,
        n=n,
        R=R,
        included=len(Ts),
        mean=mean,
        se=se,
        per_unit=mean / x.norm2,
        trunc_failures=failures,
        values=tuple(int(t) for t in arr),
    )


def estimate_mu(law: WeightLaw, x, n: int, R: int, seed: int, *,
                margin_scale: float = 2.2, threads: int = 1) -> MuEstimate:
    """Estimate mu(x) as the mean of T(0, n x)/n over R replicas."""
    x = Direction.of(x)
    if R < 2:
        raise DomainError("need at least two replicas")
    if n < 1:
        raise DomainError("n must be positive")
    records = replica_map(
        lambda r: mu_replica(law, x, n, seed, r, margin_scale), range(R), threads
    )
    return aggregate_mu(law, x, n, R, records)


@dataclass(frozen=True)
class SubadditivityResult:
    ok: bool
    at_n: MuEstimate
    at_2n: MuEstimate

    @property
    def slack(self) -> float:
        return self.at_n.mean + SIGMA_FACTOR * math.hypot(self.at_n.se, self.at_2n.se) \
            - self.at_2n.mean


def subadditivity_check(law: WeightLaw, x, n: int, R: int, seed: int, *,
                        margin_scale: float = 2.2, threads: int = 1) -> SubadditivityResult:
    """Check mean T_2n/(2n) <= mean T_n/n + 3 combined SE on fresh streams."""
    x = Direction.of(x)
    e1 = estimate_mu(law, x, n, R, derive_seed(seed, "subadd:n"),
                     margin_scale=margin_scale, threads=threads)
    e2 = estimate_mu(law, x, 2 * n, R, derive_seed(seed, "subadd:2n"),
                     margin_scale=margin_scale, threads=threads)
    ok = e2.mean <= e1.mean + SIGMA_FACTOR * math.hypot(e1.se, e2.se)
    return SubadditivityResult(ok=ok, at_n=e1, at_2n=e2)


def chord_midpoint(x1: Coords, x2: Coords, n: int) -> Coords:
    """Lattice point n (x1+x2)/2; domain error when it is not integral."""
    out = []
    for a, b in zip(x1, x2):
        num = n * (a + b)
        if num % 2:
            raise DomainError(
                "midpoint n(x1+x2)/2 is not a lattice point; use an even n "
                "or a chord with even coordinate sums"
            )
        out.append(num // 2)
    return tuple(out)


def defect_replica(law: WeightLaw, x1: Coords, x2: Coords, n: int, seed: int,
                   replica: int, margin_scale: float = 2.2) -> dict:
    """Common-random-number replica of the three chord passage times."""
    t1 = tuple(n * v for v in x1)
    t2 = tuple(n * v for v in x2)
    tm = chord_midpoint(x1, x2, n)
    span = max(sum(abs(v) for v in t) for t in (t1, t2, tm))
    box = segment_box([_origin(len(x1)), t1, t2, tm], default_margin(span, margin_scale))
    cfg = sample_config(box, law, seed, replica)
    f = distance_field(cfg, [_origin(len(x1))])
    ok = True
    for t in (t1, t2, tm):
        ok = ok and _value_certified(cfg, f, t, int(f.at(t)))
    return {"T1": f.at(t1), "T2": f.at(t2), "Tm": f.at(tm), "ok": ok}


@dataclass(frozen=True)
class DefectEstimate:
    """Midpoint-convexity defect along a chord, with CRN pairing."""

    law: WeightLaw
    x1: Coords
    x2: Coords
    n: int
    R: int
    included: int
    defect: float
    se: float
    trunc_failures: int
    per_replica: tuple[float, ...]

    def verdict(self) -> str:
        if self.defect > SIGMA_FACTOR * self.se:
            return "positive"
        if abs(self.defect) <= SIGMA_FACTOR * self.se:
            return "zero"
        return "inconclusive"


def aggregate_defect(law: WeightLaw, x1: Coords, x2: Coords, n: int, R: int,
                     records) -> DefectEstimate:
    kept = [(r["T1"], r["T2"], r["Tm"]) for r in records if r["ok"]]
    failures = sum(1 for r in records if not r["ok"])
    if len(kept) < 2:
        raise EstimationError(
            "too few replicas survived the truncation check to form a defect estimate"
        )
    arr = np.array(kept, np.int64)
    per = (arr[:, 0] + arr[:, 1] - 2 * arr[:, 2]) / (2.0 * n)
    mean = float(per.mean())
    se = float(per.std(ddof=1) / math.sqrt(len(per)))
    return DefectEstimate(
        law=law, x1=tuple(x1), x2=tuple(x2), n=n, R=R, included=len(kept),
        defect=mean, se=se, trunc_failures=failures,
        per_replica=tuple(float(v) for v in per),
    )


def flat_defect(law: WeightLaw, x1, x2, n: int, R: int, seed: int, *,
                margin_scale: float = 2.2, threads: int = 1) -> DefectEstimate:
    """Estimate the convexity defect along the chord (x1, x2) at scale n.

    The three passage times of each replica share one configuration, so the
    defect's standard error reflects the paired differences only.
    """
    x1 = tuple(int(v) for v in x1)
    x2 = tuple(int(v) for v in x2)
    chord_midpoint(x1, x2, n)  # validates integrality
    if R < 2:
        raise DomainError("need at least two replicas")
    records = replica_map(
        lambda r: defect_replica(law, x1, x2, n, seed, r, margin_scale),
        range(R), threads,
    )
    return aggregate_defect(law, x1, x2, n, R, records)


@dataclass
class ShapeBall:
    """Lattice points reached within time t from the box origin."""

    cfg: Config
    t: int
    mask: np.ndarray  # bool, shaped like the box

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def contains(self, v: Coords) -> bool:
        box = self.cfg.box
        return box.contains(v) and bool(
            self.mask[tuple(a - l for a, l in zip(v, box.lo))]
        )


def shape_ball(cfg: Config, t: int) -> ShapeBall:
    """Exact membership of the random shape at time t."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    f = distance_field(cfg, [cfg.box.origin])
    return ShapeBall(cfg=cfg, t=t, mask=f.dist <= t)


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull of 2D points, counter-clockwise without repeats."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) < 3:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


class ShapePolygon:
    """Polytope interpolation of an estimated shape boundary (d = 2).

    Boundary points x / mu(x) from a direction fan are symmetrized under
    the eight lattice symmetries and closed into a convex polygon; the
    polygon's gauge (Minkowski functional) evaluates containment tests.
    """

    def __init__(self, points: np.ndarray):
        hull = _convex_hull(points)
        if len(hull) < 3:
            raise DomainError("shape polygon needs at least three boundary points")
        self.points = hull
        nxt = np.roll(hull, -1, axis=0)
        edge = nxt - hull
        normals = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
        offsets = (normals * hull).sum(axis=1)
        if np.any(offsets <= 0):
            raise DomainError("shape polygon must contain the origin strictly")
        self.normals = normals
        self.offsets = offsets

    @classmethod
    def from_profile(cls, profile) -> "ShapePolygon":
        pts = []
        for est in profile:
            if est.direction.d != 2:
                raise DomainError("shape polygon is implemented for d = 2")
            if est.mean <= 0:
                raise DomainError("profile contains a nonpositive mu estimate")
            x, y = est.direction.vec
            r = 1.0 / est.mean
            base = [(x * r, y * r), (y * r, x * r)]
            pts.extend(
                (sx * px, sy * py)
                for px, py in base
                for sx in (1, -1)
                for sy in (1, -1)
            )
        return cls(np.array(pts))

    def gauge(self, pts: np.ndarray) -> np.ndarray:
        """Minkowski gauge of each row point: min s with p in s * polygon."""
        vals = pts @ self.normals.T / self.offsets
        return vals.max(axis=1)

    @property
    def max_radius(self) -> float:
        return float(np.hypot(self.points[:, 0], self.points[:, 1]).max())


@dataclass(frozen=True)
class ShapeCheckResult:
    t: int
    epsilon: float
    R: int
    frequency: float
    inner_failures: int
    outer_failures: int


def shape_check_replica(law: WeightLaw, t: int, epsilon: float, gauge_grid: np.ndarray,
                        box: BoxSpec, seed: int, replica: int) -> dict:
    cfg = sample_config(box, law, seed, replica)
    f = distance_field(cfg, [box.origin])
    ball = f.dist <= t
    inner_ok = bool(np.all(ball[gauge_grid <= t * (1.0 - epsilon)]))
    outer_ok = bool(np.all(gauge_grid[ball] <= t * (1.0 + epsilon)))
    return {"inner": inner_ok, "outer": outer_ok}


def shape_check_box(polygon: ShapePolygon, t: int, epsilon: float) -> BoxSpec:
    s = int(math.ceil(t * (1.0 + epsilon) * polygon.max_radius)) + 2
    return BoxSpec(lo=(-s, -s), hi=(s, s))


def gauge_grid_for(polygon: ShapePolygon, box: BoxSpec) -> np.ndarray:
    xs = np.arange(box.lo[0], box.hi[0] + 1)
    ys = np.arange(box.lo[1], box.hi[1] + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.reshape(-1), Y.reshape(-1)], axis=1).astype(np.float64)
    return polygon.gauge(pts).reshape(box.dims)


def shape_theorem_check(law: WeightLaw, t: int, epsilon: float, mu_profile, R: int,
                        seed: int, *, threads: int = 1) -> ShapeCheckResult:
    """Frequency of t(1-eps) Bhat <= B(t) <= t(1+eps) Bhat over R replicas."""
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    polygon = mu_profile if isinstance(mu_profile, ShapePolygon) \
        else ShapePolygon.from_profile(mu_profile)
    box = shape_check_box(polygon, t, epsilon)
    gg = gauge_grid_for(polygon, box)
    records = replica_map(
        lambda r: shape_check_replica(law, t, epsilon, gg, box, seed, r),
        range(R), threads,
    )
    both = [r["inner"] and r["outer"] for r in records]
    return ShapeCheckResult(
        t=t, epsilon=epsilon, R=R,
        frequency=float(sum(both)) / R,
        inner_failures=sum(1 for r in records if not r["inner"]),
        outer_failures=sum(1 for r in records if not r["outer"]),
    )


@dataclass(frozen=True)
class BoundsRow:
    direction: Direction
    lower: float
    value: float
    upper: float

    @property
    def ok(self) -> bool:
        return self.lower <= self.value <= self.upper


@dataclass(frozen=True)
class BoundsCheckResult:
    rows: tuple[BoundsRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def bounds_check(mu_profile) -> BoundsCheckResult:
    """Norm form of the cube/diamond containment of the shape.

    For every direction x in the profile, requires
    muF |x|_inf - 3 SE <= mu(x) <= muF |x|_1 + 3 SE, with muF the axis
    estimate and the SE combining both estimates' errors in quadrature.
    """
    axis = next(
        (e for e in mu_profile if e.direction.vec == (1,) + (0,) * (e.direction.d - 1)),
        None,
    )
    if axis is None:
        raise DomainError("profile must include the first axis direction")
    rows = []
    for est in mu_profile:
        lo_se = math.hypot(est.direction.norminf * axis.se, est.se)
        hi_se = math.hypot(est.direction.norm1 * axis.se, est.se)
        rows.append(
            BoundsRow(
                direction=est.direction,
                lower=axis.mean * est.direction.norminf - SIGMA_FACTOR * lo_se,
                value=est.mean,
                upper=axis.mean * est.direction.norm1 + SIGMA_FACTOR * hi_se,
            )
        )
    return BoundsCheckResult(rows=tuple(rows))


@dataclass(frozen=True)
class ConcentrationRow:
    n: int
    R: int
    mean: float
    sd: float
    sd_over_n: float
    tail_freq: tuple[tuple[float, float], ...]  # (z, P(|b - mean| >= z n))
    values: tuple[int, ...]


def plane_box(law: WeightLaw, n: int, d: int, margin_scale: float) -> BoxSpec:
    behind = default_margin(n, margin_scale)
    lateral = default_margin(n, margin_scale * 1.5)
    lo = (-behind,) + (-lateral,) * (d - 1)
    hi = (n,) + (lateral,) * (d - 1)
    return BoxSpec(lo=lo, hi=hi)


def plane_replica(law: WeightLaw, n: int, d: int, seed: int, replica: int,
                  margin_scale: float = 2.2) -> dict:
    box = plane_box(law, n, d, margin_scale)
    cfg = sample_config(box, law, seed, replica)
    f = distance_field(cfg, [_origin(d)])
    return {"b": int(f.dist[n - box.lo[0]].min())}


def concentration_stats(law: WeightLaw, n_list, R: int, seed: int, *, d: int = 2,
                        z_grid=(0.1, 0.2, 0.3), margin_scale: float = 2.2,
                        threads: int = 1) -> list[ConcentrationRow]:
    """Spread of the point-to-plane time b_{0,n} across scales.

    Reports the empirical sd and the tail frequencies P(|b - mean| >= z n);
    used for sublinearity trend checks, not constant recovery.
    """
    rows = []
    for n in n_list:
        sub = derive_seed(seed, f"plane:{n}")
        records = replica_map(
            lambda r: plane_replica(law, n, d, sub, r, margin_scale),
            range(R), threads,
        )
        vals = np.array([rec["b"] for rec in records], np.int64)
        mean = float(vals.sum()) / len(vals)
        sd = float(np.std(vals.astype(np.float64), ddof=1))
        tails = tuple(
            (float(z), float(np.mean(np.abs(vals - mean) >= z * n))) for z in z_grid
        )
        rows.append(
            ConcentrationRow(
                n=n, R=R, mean=mean, sd=sd, sd_over_n=sd / n, tail_freq=tails,
                values=tuple(int(v) for v in vals),
            )
        )
    return rows
