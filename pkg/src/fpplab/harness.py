"""Experiment orchestration: validated specs, seeded replica blocks,
append-only CSV results with JSON provenance sidecars.

Determinism contract: a spec plus its master seed fully determines every
CSV byte. Replica records are computed independently (replica i's stream
is keyed by the master seed and i), collected in replica order regardless
of the thread budget, and aggregated with order-independent reductions.
Volatile run metadata (elapsed time, backend, timestamps) lives in the
sidecar, never in the CSV.

Resume: replica blocks are checkpointed as JSON files keyed by experiment
id; a rerun with ``resume=True`` loads completed blocks and computes only
the missing ones, reproducing identical rows.
"""

from __future__ import annotations

import csv
import json
import hashlib
import os
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from fpplab import backend
from fpplab._version import VERSION
from fpplab.errors import CapacityError, DomainError, EstimationError, ValidationError
from fpplab.lattice import WeightLaw
from fpplab.geodesic import distance_field, brute_force_union, geodesic_union, reference_distance_field
from fpplab.lattice import BoxSpec, sample_config
from fpplab.fixtures import pendant_config
from fpplab.parallel import replica_map
from fpplab.rng import derive_seed
from fpplab import shape as shp
from fpplab import slab as slb
from fpplab import regimes as rgm

KINDS = (
    "mu",
    "defect",
    "shape-check",
    "height-scan",
    "exits",
    "union-size",
    "regime-compare",
    "oracle-suite",
)

OUT_ENV_VAR = "FPPLAB_OUT"

COLUMNS = (
    "experiment_id", "kind", "label", "law_a", "law_b", "law_p", "d",
    "direction", "chord", "n", "kappa", "epsilon", "R", "seed",
    "count", "mean", "se", "median", "min", "max",
    "verdict", "trunc_failures", "version",
)


@dataclass
class ExperimentSpec:
    """One experiment: kind, law, geometry, replica budget, master seed."""

    kind: str
    seed: int | None = None
    law: WeightLaw | None = None
    d: int = 2
    direction: tuple[int, ...] | None = None
    fan: tuple[tuple[int, ...], ...] | None = None
    chord: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    n: int | None = None
    n_list: tuple[int, ...] | None = None
    t_list: tuple[int, ...] | None = None
    epsilon: float | None = None
    kappa: float | None = None
    slab: tuple[int, int] | None = None
    slab_preset: str = "end"
    R: int = 100
    profile_R: int | None = None
    scan_n: int = 512
    scan_R: int = 200
    sub: dict | None = None
    sup: dict | None = None
    oracle_configs: int = 500
    union_configs: int = 200
    auto_fix_chords: bool = False
    margin_scale: float = 2.2
    threads: int = 1
    block_size: int = 64
    out: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        d = dict(data)
        law = d.get("law")
        if law is not None and not isinstance(law, WeightLaw):
            if isinstance(law, dict):
                law = WeightLaw(a=int(law["a"]), b=int(law["b"]), p=float(law["p"]))
            else:
                law = WeightLaw(a=int(law[0]), b=int(law[1]), p=float(law[2]))
            d["law"] = law
        for key in ("direction",):
            if d.get(key) is not None:
                d[key] = tuple(int(x) for x in d[key])
        for key in ("n_list", "t_list"):
            if d.get(key) is not None:
                d[key] = tuple(int(x) for x in d[key])
        if d.get("fan") is not None:
            d["fan"] = tuple(tuple(int(x) for x in v) for v in d["fan"])
        if d.get("chord") is not None:
            d["chord"] = tuple(tuple(int(x) for x in v) for v in d["chord"])
        if d.get("slab") is not None:
            d["slab"] = tuple(int(x) for x in d["slab"])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValidationError([(k, "unknown field") for k in sorted(unknown)])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.law is not None:
            d["law"] = {"a": self.law.a, "b": self.law.b, "p": self.law.p}
        return d

    def identity_dict(self) -> dict:
        """Spec content that determines the results (scheduling excluded)."""
        d = self.to_dict()
        for k in ("threads", "out", "block_size"):
            d.pop(k, None)
        return d


def experiment_id(spec: ExperimentSpec) -> str:
    blob = json.dumps(spec.identity_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _law_issues(law, where="law"):
    if law is None:
        return [(where, "weight law required")]
    try:
        WeightLaw(a=law.a, b=law.b, p=law.p)
    except DomainError as e:
        return [(where, str(e))]
    return []


def _chord_issue(chord, n, auto_fix, where="chord"):
    try:
        shp.chord_midpoint(chord[0], chord[1], n)
    except DomainError as e:
        if not auto_fix:
            return [(where, f"{e} (set auto_fix_chords to double the chord)")]
    return []


def _regime_dict_issues(d, where):
    issues = []
    if not isinstance(d, dict):
        return [(where, "regime description required")]
    if "law" not in d:
        issues.append((f"{where}.law", "weight law required"))
    if not d.get("chords"):
        issues.append((f"{where}.chords", "at least one chord required"))
    return issues


def validate(spec: ExperimentSpec) -> list[tuple[str, str]]:
    """Statically checkable preconditions; returns (field, message) pairs."""
    issues = []
    if spec.kind not in KINDS:
        issues.append(("kind", f"unknown kind {spec.kind!r}; expected one of {KINDS}"))
        return issues
    if spec.seed is None:
        issues.append(("seed", "master seed is required (no wall-clock seeding)"))
    elif not 0 <= int(spec.seed) < 2**64:
        issues.append(("seed", "seed must fit in 64 bits"))
    if spec.threads < 1:
        issues.append(("threads", "thread budget must be at least 1"))
    if spec.block_size < 1:
        issues.append(("block_size", "block size must be at least 1"))
    if spec.d < 2:
        issues.append(("d", "dimension must be at least 2"))
    if spec.kappa is not None and not 0.0 < spec.kappa < 0.5:
        issues.append(("kappa", "kappa must be in (0, 1/2)"))

    kind = spec.kind
    needs_law = kind in ("mu", "defect", "shape-check", "height-scan", "exits", "union-size")
    if needs_law:
        issues += _law_issues(spec.law)
        if spec.R < 2:
            issues.append(("R", "need at least two replicas"))
    if kind == "mu":
        if spec.direction is None or all(x == 0 for x in spec.direction or ()):
            issues.append(("direction", "nonzero direction required"))
        if not spec.n or spec.n < 1:
            issues.append(("n", "scale n >= 1 required"))
    elif kind == "defect":
        if spec.chord is None:
            issues.append(("chord", "chord (x1, x2) required"))
        if not spec.n or spec.n < 1:
            issues.append(("n", "scale n >= 1 required"))
        if spec.chord is not None and spec.n:
            issues += _chord_issue(spec.chord, spec.n, spec.auto_fix_chords)
    elif kind == "shape-check":
        if spec.d != 2:
            issues.append(("d", "shape check is implemented for d = 2"))
        if not spec.n or spec.n < 1:
            issues.append(("n", "profile scale n >= 1 required"))
        if not spec.t_list:
            issues.append(("t_list", "at least one t required"))
        elif any(t < 1 for t in spec.t_list):
            issues.append(("t_list", "every t must be >= 1"))
        if spec.epsilon is None or spec.epsilon < 0:
            issues.append(("epsilon", "epsilon >= 0 required"))
    elif kind == "height-scan":
        if spec.direction is None:
            issues.append(("direction", "direction required"))
        if not spec.n_list:
            issues.append(("n_list", "increasing n_list required"))
        elif any(b <= a for a, b in zip(spec.n_list, spec.n_list[1:])):
            issues.append(("n_list", "n_list must be strictly increasing"))
    elif kind == "exits":
        if not spec.n or spec.n < 1:
            issues.append(("n", "scale n >= 1 required"))
        if spec.slab is None and spec.kappa is None:
            issues.append(("slab", "either an explicit slab or kappa required"))
        if spec.slab is not None and spec.slab[0] > spec.slab[1]:
            issues.append(("slab", "slab interval must be nonempty"))
        if spec.slab_preset not in ("mid", "end"):
            issues.append(("slab_preset", "preset must be 'mid' or 'end'"))
    elif kind == "union-size":
        if not spec.n_list:
            issues.append(("n_list", "increasing n_list required"))
        elif any(b <= a for a, b in zip(spec.n_list, spec.n_list[1:])):
            issues.append(("n_list", "n_list must be strictly increasing"))
        if spec.kappa is None:
            issues.append(("kappa", "kappa required"))
    elif kind == "regime-compare":
        if spec.d != 2:
            issues.append(("d", "regime comparison is implemented for d = 2"))
        if not spec.n or spec.n < 1:
            issues.append(("n", "scale n >= 1 required"))
        if spec.R < 2:
            issues.append(("R", "need at least two replicas"))
        issues += _regime_dict_issues(spec.sub, "sub")
        issues += _regime_dict_issues(spec.sup, "sup")
        for where in ("sub", "sup"):
            d = getattr(spec, where)
            if isinstance(d, dict) and d.get("chords") and spec.n:
                for i, ch in enumerate(d["chords"]):
                    issues += _chord_issue(ch, d.get("n", spec.n),
                                           spec.auto_fix_chords, f"{where}.chords[{i}]")
    elif kind == "oracle-suite":
        if spec.oracle_configs < 1 or spec.union_configs < 1:
            issues.append(("oracle_configs", "battery sizes must be positive"))

    if not issues:
        issues += _capacity_issues(spec)
    return issues


def _capacity_issues(spec: ExperimentSpec) -> list[tuple[str, str]]:
    """Try building the largest boxes the run will need."""
    probes = []
    try:
        if spec.kind == "mu":
            probes.append(lambda: shp.mu_box(
                spec.law, shp.Direction.of(spec.direction).scaled(spec.n), spec.margin_scale))
        elif spec.kind in ("height-scan", "union-size", "exits"):
            x = shp.Direction.of(spec.direction or (1,) + (0,) * (spec.d - 1))
            n = max(spec.n_list) if spec.n_list else spec.n
            probes.append(lambda: slb.union_box(x, n, spec.margin_scale))
        for probe in probes:
            probe()
    except CapacityError as e:
        return [("n", str(e))]
    except DomainError:
        pass
    return []


def normalize(spec: ExperimentSpec) -> ExperimentSpec:
    """Apply declared auto-fixes (chord doubling) and defaults."""
    if not spec.auto_fix_chords:
        return spec
    def fix(chord, n):
        try:
            shp.chord_midpoint(chord[0], chord[1], n)
            return chord
        except DomainError:
            return (tuple(2 * v for v in chord[0]), tuple(2 * v for v in chord[1]))
    changed = {}
    if spec.kind == "defect" and spec.chord and spec.n:
        fixed = fix(spec.chord, spec.n)
        if fixed != spec.chord:
            changed["chord"] = fixed
    if spec.kind == "regime-compare":
        for where in ("sub", "sup"):
            d = getattr(spec, where)
            if isinstance(d, dict) and d.get("chords"):
                nn = d.get("n", spec.n)
                fixed = [fix(tuple(map(tuple, ch)), nn) for ch in d["chords"]]
                if fixed != list(d["chords"]):
                    nd = dict(d)
                    nd["chords"] = fixed
                    changed[where] = nd
    if not changed:
        return spec
    data = spec.to_dict()
    data.update({k: v for k, v in changed.items()})
    return ExperimentSpec.from_dict(data)


@dataclass
class ResultRow:
    experiment_id: str
    kind: str
    label: str
    law_a: int | None = None
    law_b: int | None = None
    law_p: float | None = None
    d: int | None = None
    direction: str | None = None
    chord: str | None = None
    n: int | None = None
    kappa: float | None = None
    epsilon: float | None = None
    R: int | None = None
    seed: int | None = None
    count: int | None = None
    mean: float | None = None
    se: float | None = None
    median: float | None = None
    min: float | None = None
    max: float | None = None
    verdict: str = ""
    trunc_failures: int | None = None
    version: str = VERSION

    def csv_values(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in COLUMNS]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _stats(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "se": float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0,
        "median": float(np.median(arr)),
        "min": float(arr.min()),
        "max": float(arr.max()),
    }


def _chord_str(chord) -> str:
    return "|".join(",".join(str(v) for v in x) for x in chord)


def _trend_slope(ns, means, ses):
    """Least-squares slope of per-n means with propagated standard error."""
    x = np.asarray(ns, np.float64)
    y = np.asarray(means, np.float64)
    s = np.asarray(ses, np.float64)
    xc = x - x.mean()
    denom = float((xc**2).sum())
    slope = float((xc * y).sum() / denom)
    slope_se = float(np.sqrt((xc**2 * s**2).sum()) / denom)
    return slope, slope_se


class _Runner:
    """Shared state for one experiment run."""

    def __init__(self, spec: ExperimentSpec, resume: bool, ck_dir: Path | None):
        self.spec = spec
        self.resume = resume
        self.ck_dir = ck_dir
        self.expid = experiment_id(spec)

    def records(self, tag: str, fn, R: int) -> list[dict]:
        """Replica records for one sub-experiment, block-checkpointed."""
        bs = self.spec.block_size
        blocks = [(s, min(s + bs, R)) for s in range(0, R, bs)]

        def run_block(ib):
            i, (s, e) = ib
            path = None
            if self.ck_dir is not None:
                safe = tag.replace(":", "_").replace("/", "_").replace(",", "_")
                path = self.ck_dir / f"{safe}-{i:05d}.json"
            if self.resume and path is not None and path.exists():
                try:
                    data = json.loads(path.read_text())
                    if (
                        data.get("tag") == tag
                        and data.get("start") == s
                        and len(data.get("records", ())) == e - s
                    ):
                        return data["records"]
                except (json.JSONDecodeError, OSError):
                    pass
            recs = [fn(r) for r in range(s, e)]
            if path is not None:
                tmp = path.with_name(path.name + ".tmp")
                tmp.write_text(json.dumps({"tag": tag, "start": s, "records": recs}))
                os.replace(tmp, path)
            return recs

        out = replica_map(run_block, list(enumerate(blocks)), self.spec.threads)
        return [r for blk in out for r in blk]

    def base_row(self, **kw) -> ResultRow:
        spec = self.spec
        law = kw.pop("law", spec.law)
        row = ResultRow(
            experiment_id=self.expid,
            kind=spec.kind,
            label=kw.pop("label"),
            d=spec.d,
            seed=spec.seed,
            R=kw.pop("R", spec.R),
        )
        if law is not None:
            row.law_a, row.law_b, row.law_p = law.a, law.b, law.p
        for k, v in kw.items():
            setattr(row, k, v)
        return row


# ---------------------------------------------------------------------------
# per-kind dispatchers


def _run_mu(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    x = shp.Direction.of(spec.direction)
    recs = rn.records(
        "mu",
        lambda r: shp.mu_replica(spec.law, x, spec.n, spec.seed, r, spec.margin_scale),
        spec.R,
    )
    est = shp.aggregate_mu(spec.law, x, spec.n, spec.R, recs)
    st = _stats(est.ratios())
    return [rn.base_row(label="mu", direction=str(x), n=spec.n,
                        trunc_failures=est.trunc_failures, **st)]


def _run_defect(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    x1, x2 = spec.chord
    recs = rn.records(
        "defect",
        lambda r: shp.defect_replica(spec.law, x1, x2, spec.n, spec.seed, r,
                                     spec.margin_scale),
        spec.R,
    )
    est = shp.aggregate_defect(spec.law, x1, x2, spec.n, spec.R, recs)
    st = _stats(est.per_replica)
    return [rn.base_row(label="defect", chord=_chord_str(spec.chord), n=spec.n,
                        verdict=est.verdict(), trunc_failures=est.trunc_failures, **st)]


def _run_shape_check(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    fan = spec.fan or ((1, 0), (1, 1), (2, 1), (3, 1))
    prof_R = spec.profile_R or spec.R
    rows = []
    profile = []
    for v in fan:
        x = shp.Direction.of(v)
        sub_seed = derive_seed(spec.seed, f"profile:{x}")
        recs = rn.records(
            f"profile:{x}",
            lambda r, x=x, s=sub_seed: shp.mu_replica(spec.law, x, spec.n, s, r,
                                                      spec.margin_scale),
            prof_R,
        )
        est = shp.aggregate_mu(spec.law, x, spec.n, prof_R, recs)
        profile.append(est)
        st = _stats(est.ratios())
        rows.append(rn.base_row(label="mu", direction=str(x), n=spec.n, R=prof_R,
                                trunc_failures=est.trunc_failures, **st))
    polygon = shp.ShapePolygon.from_profile(profile)
    for t in spec.t_list:
        box = shp.shape_check_box(polygon, t, spec.epsilon)
        gg = shp.gauge_grid_for(polygon, box)
        sub_seed = derive_seed(spec.seed, f"shape:{t}")
        recs = rn.records(
            f"shape:{t}",
            lambda r, t=t, gg=gg, box=box, s=sub_seed: shp.shape_check_replica(
                spec.law, t, spec.epsilon, gg, box, s, r),
            spec.R,
        )
        ok = [r["inner"] and r["outer"] for r in recs]
        freq = float(sum(ok)) / len(ok)
        rows.append(rn.base_row(label="shape_contain", n=t, epsilon=spec.epsilon,
                                count=len(ok), mean=freq))
    return rows


def _run_height_scan(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    x = shp.Direction.of(spec.direction)
    rows = []
    scan_rows = []
    for n in spec.n_list:
        sub_seed = derive_seed(spec.seed, f"height:{n}")
        recs = rn.records(
            f"height:{n}",
            lambda r, n=n, s=sub_seed: slb.height_replica(spec.law, x, n, s, r,
                                                          spec.margin_scale),
            spec.R,
        )
        hrow = slb.aggregate_heights(n, spec.R, recs)
        scan_rows.append(hrow)
        rows.append(rn.base_row(label="height", direction=str(x), n=n,
                                trunc_failures=hrow.trunc_failures,
                                **_stats(hrow.heights)))
        ratios = np.array(hrow.heights) / n
        rows.append(rn.base_row(label="height_ratio", direction=str(x), n=n,
                                trunc_failures=hrow.trunc_failures,
                                **_stats(ratios)))
    fit = slb.fit_height_exponent(scan_rows)
    if fit is not None:
        rows.append(rn.base_row(label="xi_fit", direction=str(x),
                                count=fit.n_used, mean=fit.exponent,
                                se=fit.stderr, median=fit.r2,
                                verdict="descriptive"))
    return rows


def _run_exits(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    x = shp.Direction.of(spec.direction or (1,) + (0,) * (spec.d - 1))
    src = (0,) * spec.d
    dst = x.scaled(spec.n)
    if spec.slab is not None:
        slab_spec = slb.SlabSpec(lo=spec.slab[0], hi=spec.slab[1])
    else:
        slab_spec = slb.slab_interval(src, dst, spec.kappa, spec.slab_preset)
    recs = rn.records(
        "exits",
        lambda r: slb.exits_replica(spec.law, x, spec.n, slab_spec, spec.seed, r,
                                    spec.margin_scale),
        spec.R,
    )
    kept = [r for r in recs if r["ok"]]
    failures = len(recs) - len(kept)
    if not kept:
        raise EstimationError("every replica failed the truncation check")
    mins = [r["min"] for r in kept]
    crossed = all(r["crossed"] for r in kept)
    st = _stats(mins)
    return [rn.base_row(label="exit_min_count", direction=str(x), n=spec.n,
                        kappa=spec.kappa,
                        verdict="all_planes_crossed" if crossed else "violation",
                        trunc_failures=failures, **st)]


def _run_union_size(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    x = shp.Direction.of(spec.direction or (1,) + (0,) * (spec.d - 1))
    rows = []
    per_n = {"union": [], "slab": []}
    for n in spec.n_list:
        sub_seed = derive_seed(spec.seed, f"union:{n}")
        recs = rn.records(
            f"union:{n}",
            lambda r, n=n, s=sub_seed: slb.union_size_replica(
                spec.law, x, n, spec.kappa, s, r, spec.margin_scale),
            spec.R,
        )
        kept = [r for r in recs if r["ok"]]
        failures = len(recs) - len(kept)
        if len(kept) < 2:
            raise EstimationError("too few replicas survived truncation")
        union_ratio = np.array([r["union"] for r in kept], np.float64) / n
        slab_ratio = np.array([r["slab"] for r in kept], np.float64) / (spec.kappa * n)
        mins = [r["exit_min"] for r in kept]
        crossed = all(r["crossed"] for r in kept)
        st_u = _stats(union_ratio)
        st_s = _stats(slab_ratio)
        rows.append(rn.base_row(label="union_per_n", direction=str(x), n=n,
                                kappa=spec.kappa, trunc_failures=failures, **st_u))
        rows.append(rn.base_row(label="slab_per_kn", direction=str(x), n=n,
                                kappa=spec.kappa, trunc_failures=failures, **st_s))
        rows.append(rn.base_row(label="exit_min_count", direction=str(x), n=n,
                                kappa=spec.kappa,
                                verdict="all_planes_crossed" if crossed else "violation",
                                trunc_failures=failures, **_stats(mins)))
        per_n["union"].append((n, st_u["mean"], st_u["se"]))
        per_n["slab"].append((n, st_s["mean"], st_s["se"]))
    for key, label in (("union", "union_slope"), ("slab", "slab_slope")):
        ns, means, ses = zip(*per_n[key])
        slope, slope_se = _trend_slope(ns, means, ses)
        verdict = "bounded" if slope <= shp.SIGMA_FACTOR * slope_se else "upward"
        rows.append(rn.base_row(label=label, direction=str(x), kappa=spec.kappa,
                                count=len(ns), mean=slope, se=slope_se,
                                verdict=verdict))
    return rows


def _regime_spec_from(d: dict, default_label: str, spec: ExperimentSpec) -> rgm.RegimeSpec:
    law = d["law"]
    if not isinstance(law, WeightLaw):
        if isinstance(law, dict):
            law = WeightLaw(a=int(law["a"]), b=int(law["b"]), p=float(law["p"]))
        else:
            law = WeightLaw(a=int(law[0]), b=int(law[1]), p=float(law[2]))
    label = d.get("label", default_label)
    return rgm.RegimeSpec.make(
        label=label,
        law=law,
        fan=d.get("fan", ((1, 0), (1, 1))),
        chords=d["chords"],
        n=d.get("n", spec.n),
        R=d.get("R", spec.R),
        seed=derive_seed(spec.seed, f"regime:{label}"),
        scan_n=spec.scan_n,
        scan_R=spec.scan_R,
    )


def _run_regime_compare(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    sub = _regime_spec_from(spec.sub, "sub", spec)
    sup = _regime_spec_from(spec.sup, "sup", spec)
    report = rgm.run_regime_comparison(sub, sup, threads=spec.threads)
    rows = []
    for res in (report.sub, report.sup):
        tag = res.spec.label
        for est in res.mu_profile:
            rows.append(rn.base_row(label=f"{tag}:mu", law=res.spec.law,
                                    direction=str(est.direction), n=est.n,
                                    R=est.R, trunc_failures=est.trunc_failures,
                                    **_stats(est.ratios())))
        for ch in res.chords:
            rows.append(rn.base_row(label=f"{tag}:defect", law=res.spec.law,
                                    chord=_chord_str(ch.chord), n=ch.estimate.n,
                                    R=ch.estimate.R, verdict=ch.verdict,
                                    trunc_failures=ch.estimate.trunc_failures,
                                    **_stats(ch.estimate.per_replica)))
    diag = report.sup_diag_mu
    rows.append(rn.base_row(label=f"{report.sup.spec.label}:diag_mu",
                            law=report.sup.spec.law,
                            direction=str(diag.direction), n=diag.n, R=diag.R,
                            verdict="ok" if report.sup_diag_ok else "deviates",
                            trunc_failures=diag.trunc_failures,
                            **_stats(diag.ratios())))
    rows.append(rn.base_row(label=f"{report.sup.spec.label}:oriented_freq",
                            law=report.sup.spec.law, n=sup.scan_n, R=sup.scan_R,
                            count=sup.scan_R, mean=report.oriented_frequency))
    return rows


_ORACLE_LAWS = ((0, 1), (1, 2))
_ORACLE_PS = (0.1, 0.25, 0.5, 0.9)


def _run_oracle_suite(rn: _Runner) -> list[ResultRow]:
    spec = rn.spec
    seed = derive_seed(spec.seed, "oracle")
    box = BoxSpec(lo=(0, 0), hi=(11, 11))
    mismatches = 0
    for i in range(spec.oracle_configs):
        a, b = _ORACLE_LAWS[i % 2]
        p = _ORACLE_PS[(i // 2) % 4]
        law = WeightLaw(a=a, b=b, p=p)
        cfg = sample_config(box, law, seed, i)
        f = distance_field(cfg, [(0, 0)])
        ref = reference_distance_field(cfg, [(0, 0)])
        if not np.array_equal(f.dist.astype(np.int64), ref):
            mismatches += 1
    rows = [rn.base_row(label="oracle_equiv", law=None, count=spec.oracle_configs,
                        mean=float(mismatches),
                        verdict="exact" if mismatches == 0 else "mismatch")]

    seed2 = derive_seed(spec.seed, "superset")
    sbox = BoxSpec(lo=(0, 0), hi=(3, 3))
    violations = 0
    for i in range(spec.union_configs):
        a, b = _ORACLE_LAWS[i % 2]
        p = _ORACLE_PS[(i // 2) % 4]
        law = WeightLaw(a=a, b=b, p=p)
        cfg = sample_config(sbox, law, seed2, i)
        bf = brute_force_union(cfg, (0, 0), (3, 3))
        gu = geodesic_union(cfg, (0, 0), (3, 3))
        if not bf.is_subset_of(gu) or bf.value != gu.value:
            violations += 1
    cfg, src, dst, pendant = pendant_config()
    bf = brute_force_union(cfg, src, dst)
    gu = geodesic_union(cfg, src, dst)
    strict = bf.is_subset_of(gu) and not gu.is_subset_of(bf) \
        and gu.contains_vertex(pendant) and not bf.contains_vertex(pendant)
    if not strict:
        violations += 1
    rows.append(rn.base_row(label="superset_law", law=None, count=spec.union_configs + 1,
                            mean=float(violations),
                            verdict="exact" if violations == 0 else "violation"))
    return rows


_DISPATCH = {
    "mu": _run_mu,
    "defect": _run_defect,
    "shape-check": _run_shape_check,
    "height-scan": _run_height_scan,
    "exits": _run_exits,
    "union-size": _run_union_size,
    "regime-compare": _run_regime_compare,
    "oracle-suite": _run_oracle_suite,
}


@dataclass
class RunResult:
    spec: ExperimentSpec
    rows: list[ResultRow]
    csv_path: Path
    sidecar_path: Path
    elapsed_s: float


def resolve_out_path(spec: ExperimentSpec, expid: str) -> Path:
    out = spec.out or os.environ.get(OUT_ENV_VAR) or "results"
    p = Path(out)
    if p.suffix == ".csv":
        return p
    return p / f"{spec.kind}-{expid}.csv"


def write_rows(csv_path: Path, rows) -> None:
    """Append rows; write the header only when the file is new or empty."""
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    new = not csv_path.exists() or csv_path.stat().st_size == 0
    with csv_path.open("a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(COLUMNS)
        for row in rows:
            w.writerow(row.csv_values())


def run(spec: ExperimentSpec, resume: bool = False) -> RunResult:
    """Validate, dispatch, persist. Raises ValidationError on a bad spec."""
    issues = validate(spec)
    if issues:
        raise ValidationError(issues)
    spec = normalize(spec)
    expid = experiment_id(spec)
    csv_path = resolve_out_path(spec, expid)
    ck_dir = csv_path.parent / ".checkpoints" / expid
    ck_dir.mkdir(parents=True, exist_ok=True)
    rn = _Runner(spec, resume, ck_dir)
    t0 = time.perf_counter()
    rows = _DISPATCH[spec.kind](rn)
    elapsed = time.perf_counter() - t0
    write_rows(csv_path, rows)
    sidecar = csv_path.with_name(csv_path.stem + ".sidecar.json")
    sidecar.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "experiment_id": expid,
                "spec": spec.to_dict(),
                "version": VERSION,
                "backend": backend.active_backend(),
                "elapsed_s": elapsed,
                "rows_appended": len(rows),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return RunResult(spec=spec, rows=rows, csv_path=csv_path,
                     sidecar_path=sidecar, elapsed_s=elapsed)
