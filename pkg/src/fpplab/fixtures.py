"""Hand-built configurations with known optimal-path structure."""

from __future__ import annotations

from fpplab.lattice import BoxSpec, Config, Coords, EdgeRef, WeightLaw, config_from_edge_weights


def pendant_config() -> tuple[Config, Coords, Coords, Coords]:
    """Zero-weight pendant hanging off a zero-weight geodesic.

    Returns (cfg, src, dst, pendant_vertex) on the 3x2 box [0,2]x[0,1]:
    the bottom row and the middle vertical edge have weight 0, everything
    else weight 1. The only self-avoiding optimal path from (0,0) to (2,0)
    is the bottom row, but the pendant tip (1,1) satisfies the distance-sum
    criterion, so the criterion set strictly contains the true union.
    """
    box = BoxSpec(lo=(0, 0), hi=(2, 1))
    law = WeightLaw(a=0, b=1, p=0.5)
    zero_edges = {
        EdgeRef((0, 0), 0): 0,  # (0,0)-(1,0)
        EdgeRef((1, 0), 0): 0,  # (1,0)-(2,0)
        EdgeRef((1, 0), 1): 0,  # (1,0)-(1,1): the pendant
    }
    cfg = config_from_edge_weights(box, law, zero_edges, default=1)
    return cfg, (0, 0), (2, 0), (1, 1)


def single_path_config(n: int = 3) -> tuple[Config, Coords, Coords]:
    """A forced staircase of low-weight edges in a sea of high weights.

    With law {1, 2}, the a-edges trace the unique optimal path from (0,0)
    to (n,1): along the bottom to (n,0), then up.
    """
    box = BoxSpec(lo=(0, 0), hi=(n, 1))
    law = WeightLaw(a=1, b=2, p=0.5)
    cheap = {EdgeRef((i, 0), 0): 1 for i in range(n)}
    cheap[EdgeRef((n, 0), 1)] = 1
    cfg = config_from_edge_weights(box, law, cheap, default=2)
    return cfg, (0, 0), (n, 1)
