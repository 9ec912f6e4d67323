"""Side-by-side comparison of the two weight regimes.

Subcritical regime: Bernoulli zero/one weights with P(t=0) below the bond
percolation threshold, where the shape boundary is expected to show a
strictly positive convexity defect along every chord. Supercritical
regime: weights {1, 2} with P(t=1) above the oriented percolation
threshold, where the boundary carries a flat segment around the diagonal
(the percolation cone), so diagonal chords show a zero defect and the
diagonal time constant collapses to the low weight per lattice step.

Threshold constants are literature values used to select regimes only;
this package does not estimate them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fpplab import backend
from fpplab.errors import DomainError
from fpplab.lattice import BoxSpec, Config, Coords, WeightLaw, low_bit_grids_flat, sample_config
from fpplab.parallel import replica_map
from fpplab.rng import derive_seed
from fpplab.shape import (
    SIGMA_FACTOR,
    DefectEstimate,
    Direction,
    MuEstimate,
    estimate_mu,
    flat_defect,
)

BOND_PC_Z2 = 0.5  # bond percolation threshold on Z^2 (literature value)
ORIENTED_PC_Z2 = 0.6447  # oriented bond percolation threshold (literature value)

VICINITY_RADIUS = 4


@dataclass(frozen=True)
class RegimeSpec:
    """One regime's law and probe plan."""

    label: str
    law: WeightLaw
    fan: tuple[Direction, ...]
    chords: tuple[tuple[Coords, Coords], ...]
    n: int
    R: int
    seed: int
    scan_n: int = 512
    scan_R: int = 200

    @classmethod
    def make(cls, label, law, fan, chords, n, R, seed, scan_n=512, scan_R=200):
        return cls(
            label=label,
            law=law,
            fan=tuple(Direction.of(v) for v in fan),
            chords=tuple(
                (tuple(int(a) for a in c[0]), tuple(int(b) for b in c[1]))
                for c in chords
            ),
            n=int(n),
            R=int(R),
            seed=int(seed),
            scan_n=int(scan_n),
            scan_R=int(scan_R),
        )


def oriented_path_scan(cfg: Config, n: int) -> bool:
    """Does an up-right path of low-weight edges reach the plane x1+x2 = n
    from the origin's vicinity (all vertices with L1 norm <= 4)?
    """
    box = cfg.box
    if box.d != 2:
        raise DomainError("oriented scan is implemented for d = 2")
    seeds = []
    r = VICINITY_RADIUS
    for i in range(-r, r + 1):
        for j in range(-r, r + 1):
            if abs(i) + abs(j) <= r:
                if not box.contains((i, j)):
                    raise DomainError("box must contain the origin's vicinity")
                seeds.append(box.vertex_index((i, j)))
    if n < box.lo[0] + box.lo[1] or n > box.hi[0] + box.hi[1]:
        raise DomainError(f"plane x1+x2={n} does not intersect the box")
    bits = low_bit_grids_flat(cfg)
    V = box.nvertices
    nx, ny = box.dims
    reach = backend.kernels().oriented_reach(
        nx, ny, bits[:V], bits[V:], np.array(seeds, np.int64)
    ).reshape(nx, ny)
    k = n - box.lo[0] - box.lo[1]
    i0 = max(0, k - (ny - 1))
    i1 = min(nx - 1, k)
    idx = np.arange(i0, i1 + 1)
    return bool(reach[idx, k - idx].any())


def oriented_scan_box(n: int) -> BoxSpec:
    return BoxSpec(lo=(-VICINITY_RADIUS, -VICINITY_RADIUS), hi=(n + 1, n + 1))


def oriented_replica(law: WeightLaw, n: int, seed: int, replica: int) -> dict:
    cfg = sample_config(oriented_scan_box(n), law, seed, replica)
    return {"hit": oriented_path_scan(cfg, n)}


def oriented_scan_frequency(law: WeightLaw, n: int, R: int, seed: int, *,
                            threads: int = 1) -> float:
    records = replica_map(
        lambda r: oriented_replica(law, n, seed, r), range(R), threads
    )
    return sum(1 for r in records if r["hit"]) / R


@dataclass(frozen=True)
class ChordResult:
    chord: tuple[Coords, Coords]
    estimate: DefectEstimate
    verdict: str


@dataclass(frozen=True)
class RegimeResult:
    spec: RegimeSpec
    mu_profile: tuple[MuEstimate, ...]
    chords: tuple[ChordResult, ...]


@dataclass(frozen=True)
class RegimeReport:
    sub: RegimeResult
    sup: RegimeResult
    sup_diag_mu: MuEstimate
    sup_diag_expected: float
    sup_diag_ok: bool
    oriented_frequency: float


def _run_regime(spec: RegimeSpec, threads: int) -> RegimeResult:
    profile = tuple(
        estimate_mu(spec.law, x, spec.n, spec.R, derive_seed(spec.seed, f"mu:{x}"),
                    threads=threads)
        for x in spec.fan
    )
    chords = []
    for i, (x1, x2) in enumerate(spec.chords):
        est = flat_defect(spec.law, x1, x2, spec.n, spec.R,
                          derive_seed(spec.seed, f"defect:{i}"), threads=threads)
        chords.append(ChordResult(chord=(x1, x2), estimate=est, verdict=est.verdict()))
    return RegimeResult(spec=spec, mu_profile=profile, chords=tuple(chords))


def run_regime_comparison(sub: RegimeSpec, sup: RegimeSpec, *,
                          threads: int = 1) -> RegimeReport:
    """Probe both regimes and contrast their chord verdicts.

    The supercritical side additionally checks that the diagonal time
    constant matches the low weight times the L1 norm (flat edge on the
    percolation cone) and that oriented low-weight paths span at the
    expected frequency.
    """
    if not (sub.law.a == 0 and sub.law.b == 1 and sub.law.p < BOND_PC_Z2):
        raise DomainError(
            "subcritical regime needs zero/one weights with p below 1/2"
        )
    if not (sup.law.a >= 1 and sup.law.p > ORIENTED_PC_Z2):
        raise DomainError(
            "supercritical regime needs a >= 1 and p above the oriented threshold"
        )
    sub_res = _run_regime(sub, threads)
    sup_res = _run_regime(sup, threads)
    diag = Direction((1, 1))
    diag_mu = estimate_mu(sup.law, diag, sup.n, sup.R,
                          derive_seed(sup.seed, "mu:diag"), threads=threads)
    expected = float(sup.law.a * diag.norm1)
    diag_ok = abs(diag_mu.mean - expected) <= SIGMA_FACTOR * diag_mu.se
    freq = oriented_scan_frequency(sup.law, sup.scan_n, sup.scan_R,
                                   derive_seed(sup.seed, "scan"), threads=threads)
    return RegimeReport(
        sub=sub_res,
        sup=sup_res,
        sup_diag_mu=diag_mu,
        sup_diag_expected=expected,
        sup_diag_ok=diag_ok,
        oriented_frequency=freq,
    )
