"""fpplab: first-passage percolation on finite lattice boxes.

Exact passage-time fields, geodesic-union geometry, and seeded Monte Carlo
probes of the asymptotic shape: time-constant estimates, flat-edge
(midpoint-convexity) defects, heights, slab restrictions and exits, and a
subcritical-vs-supercritical regime comparison.
"""

from fpplab._version import VERSION as __version__
from fpplab.backend import active_backend, set_backend
from fpplab.errors import (
    CapacityError,
    DomainError,
    EstimationError,
    FpplabError,
    ValidationError,
)
from fpplab.lattice import (
    BoxSpec,
    Config,
    EdgeRef,
    WeightLaw,
    config_from_edge_weights,
    edge_weight,
    sample_config,
    segment_box,
)
from fpplab.geodesic import (
    DistField,
    GeodesicSet,
    Path,
    brute_force_union,
    distance_field,
    extract_path,
    geodesic_union,
    plane_time,
    point_time,
    reference_distance_field,
    truncation_check,
)
from fpplab.shape import (
    DefectEstimate,
    Direction,
    MuEstimate,
    ShapeBall,
    bounds_check,
    concentration_stats,
    estimate_mu,
    flat_defect,
    shape_ball,
    shape_theorem_check,
    subadditivity_check,
)
from fpplab.slab import (
    ExitReport,
    HeightScan,
    SlabSpec,
    exits,
    height,
    height_scan,
    slab_union,
)
from fpplab.regimes import (
    RegimeReport,
    RegimeSpec,
    oriented_path_scan,
    oriented_scan_frequency,
    run_regime_comparison,
)
from fpplab.harness import ExperimentSpec, ResultRow, run, validate

__all__ = [
    "__version__",
    "active_backend",
    "set_backend",
    "FpplabError",
    "DomainError",
    "CapacityError",
    "EstimationError",
    "ValidationError",
    "BoxSpec",
    "WeightLaw",
    "Config",
    "EdgeRef",
    "sample_config",
    "edge_weight",
    "config_from_edge_weights",
    "segment_box",
    "DistField",
    "GeodesicSet",
    "Path",
    "distance_field",
    "point_time",
    "plane_time",
    "geodesic_union",
    "brute_force_union",
    "extract_path",
    "truncation_check",
    "reference_distance_field",
    "Direction",
    "MuEstimate",
    "DefectEstimate",
    "ShapeBall",
    "estimate_mu",
    "subadditivity_check",
    "flat_defect",
    "shape_ball",
    "shape_theorem_check",
    "bounds_check",
    "concentration_stats",
    "SlabSpec",
    "ExitReport",
    "HeightScan",
    "height",
    "slab_union",
    "exits",
    "height_scan",
    "RegimeSpec",
    "RegimeReport",
    "run_regime_comparison",
    "oriented_path_scan",
    "oriented_scan_frequency",
    "ExperimentSpec",
    "ResultRow",
    "run",
    "validate",
]
