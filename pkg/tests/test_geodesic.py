import itertools

import numpy as np
import pytest

from fpplab.errors import CapacityError, DomainError
from fpplab.fixtures import pendant_config, single_path_config
from fpplab.geodesic import (
    brute_force_union,
    distance_field,
    extract_path,
    geodesic_union,
    plane_time,
    point_time,
    reference_distance_field,
    truncation_check,
)
from fpplab.lattice import (
    BoxSpec,
    EdgeRef,
    WeightLaw,
    config_from_edge_weights,
    sample_config,
)

ALL_ONES = WeightLaw(a=1, b=1, p=0.5)
ALL_ZERO = WeightLaw(a=0, b=0, p=0.5)


def _cfg(lo, hi, law, seed=0, replica=0):
    return sample_config(BoxSpec(lo=lo, hi=hi), law, seed, replica)


def test_unit_weights_give_graph_distance():
    cfg = _cfg((-4, -4), (4, 4), ALL_ONES)
    f = distance_field(cfg, [(0, 0)])
    for v in [(3, -2), (-4, 4), (0, 0), (1, 1)]:
        assert f.at(v) == abs(v[0]) + abs(v[1])


def test_zero_weights_give_zero_field():
    cfg = _cfg((0, 0), (5, 5), ALL_ZERO)
    f = distance_field(cfg, [(2, 2)])
    assert int(f.dist.max()) == 0


def test_two_by_two_hand_example():
    # both simple corner-to-corner paths cost 1
    box = BoxSpec(lo=(0, 0), hi=(1, 1))
    law = WeightLaw(0, 1, 0.5)
    cfg = config_from_edge_weights(
        box,
        law,
        {
            EdgeRef((0, 0), 0): 1,  # (0,0)-(1,0)
            EdgeRef((0, 0), 1): 0,  # (0,0)-(0,1)
            EdgeRef((1, 0), 1): 0,  # (1,0)-(1,1)
            EdgeRef((0, 1), 0): 1,  # (0,1)-(1,1)
        },
    )
    assert point_time(cfg, (0, 0), (1, 1)) == 1


def test_point_time_contracts():
    cfg = _cfg((0, 0), (8, 8), WeightLaw(0, 1, 0.3), seed=5)
    assert point_time(cfg, (4, 4), (4, 4)) == 0
    assert point_time(cfg, (1, 2), (6, 7)) == point_time(cfg, (6, 7), (1, 2))
    with pytest.raises(DomainError):
        point_time(cfg, (0, 0), (9, 0))


def test_empty_sources_rejected():
    cfg = _cfg((0, 0), (3, 3), ALL_ONES)
    with pytest.raises(DomainError):
        distance_field(cfg, [])


@pytest.mark.parametrize("law", [WeightLaw(0, 1, 0.25), WeightLaw(1, 2, 0.6)])
def test_field_matches_quadratic_scan_oracle(law):
    for seed in range(6):
        cfg = _cfg((0, 0), (7, 7), law, seed=seed)
        f = distance_field(cfg, [(0, 0)])
        ref = reference_distance_field(cfg, [(0, 0)])
        assert np.array_equal(f.dist.astype(np.int64), ref)


def test_multi_source_field_matches_oracle():
    cfg = _cfg((0, 0), (6, 6), WeightLaw(0, 1, 0.4), seed=8)
    sources = [(0, 0), (6, 6), (3, 0)]
    f = distance_field(cfg, sources)
    ref = reference_distance_field(cfg, sources)
    assert np.array_equal(f.dist.astype(np.int64), ref)


def test_plane_time_unit_and_zero():
    cfg = _cfg((0, 0), (9, 9), ALL_ONES)
    assert plane_time(cfg, (0, 0), 7) == 7
    cfg0 = _cfg((0, 0), (9, 9), ALL_ZERO)
    assert plane_time(cfg0, (0, 0), 7) == 0
    with pytest.raises(DomainError):
        plane_time(cfg, (0, 0), 10)


def test_plane_time_matches_oracle_and_bounds_point_time():
    for seed in range(4):
        cfg = _cfg((0, 0), (15, 15), WeightLaw(0, 1, 0.25), seed=seed)
        ref = reference_distance_field(cfg, [(0, 0)])
        n = 12
        assert plane_time(cfg, (0, 0), n) == int(ref[n].min())
        assert plane_time(cfg, (0, 0), n) <= point_time(cfg, (0, 0), (n, 0))


def test_union_unit_weights_square():
    # every monotone staircase is optimal: all 9 vertices of [0,2]^2
    cfg = _cfg((0, 0), (2, 2), ALL_ONES)
    gs = geodesic_union(cfg, (0, 0), (2, 2))
    assert gs.vertex_count == 9
    assert gs.value == 4


def test_union_unit_weights_axis_segment():
    cfg = _cfg((0, -3), (8, 3), ALL_ONES)
    gs = geodesic_union(cfg, (0, 0), (8, 0))
    members = {tuple(v) for v in gs.member_coords()}
    assert members == {(i, 0) for i in range(9)}


def test_pendant_fixture_strict_superset():
    cfg, src, dst, pendant = pendant_config()
    bf = brute_force_union(cfg, src, dst)
    gs = geodesic_union(cfg, src, dst)
    assert bf.value == gs.value == 0
    assert bf.is_subset_of(gs)
    assert not gs.is_subset_of(bf)
    assert gs.contains_vertex(pendant)
    assert not bf.contains_vertex(pendant)


def test_single_path_fixture_is_exact_staircase():
    cfg, src, dst = single_path_config(n=3)
    bf = brute_force_union(cfg, src, dst)
    expected = {(0, 0), (1, 0), (2, 0), (3, 0), (3, 1)}
    assert {tuple(v) for v in bf.member_coords()} == expected
    gs = geodesic_union(cfg, src, dst)
    assert {tuple(v) for v in gs.member_coords()} == expected


def test_superset_law_on_random_small_boxes():
    for seed in range(25):
        law = WeightLaw(0, 1, 0.5 if seed % 2 else 0.25)
        cfg = _cfg((0, 0), (3, 3), law, seed=seed)
        bf = brute_force_union(cfg, (0, 0), (3, 3))
        gs = geodesic_union(cfg, (0, 0), (3, 3))
        assert bf.value == gs.value
        assert bf.is_subset_of(gs)


def test_brute_force_capacity_guard():
    cfg = _cfg((0, 0), (5, 5), ALL_ONES)
    with pytest.raises(CapacityError):
        brute_force_union(cfg, (0, 0), (5, 5))


def test_extract_path_unit_weights():
    cfg = _cfg((0, 0), (5, 3), ALL_ONES)
    p = extract_path(cfg, (0, 0), (5, 3))
    assert p.time == 8
    assert p.hops == 8
    assert p.vertices[0] == (0, 0) and p.vertices[-1] == (5, 3)


def test_extract_path_zero_weights_min_hops():
    # min-hop tie rule forbids wandering through the zero-cost box
    cfg = _cfg((0, 0), (6, 6), ALL_ZERO)
    p = extract_path(cfg, (1, 1), (5, 4))
    assert p.time == 0
    assert p.hops == 7


def test_extract_path_cross_checks_on_random_config():
    cfg = _cfg((0, 0), (15, 15), WeightLaw(0, 1, 0.25), seed=3)
    src, dst = (0, 0), (15, 15)
    p = extract_path(cfg, src, dst)
    assert p.time == point_time(cfg, src, dst)
    gs = geodesic_union(cfg, src, dst)
    assert all(gs.contains_vertex(v) for v in p.vertices)
    # self-avoiding, adjacent steps
    assert len(set(p.vertices)) == len(p.vertices)
    for a, b in zip(p.vertices, p.vertices[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def test_extract_path_deterministic():
    cfg = _cfg((0, 0), (10, 10), WeightLaw(0, 1, 0.5), seed=9)
    p1 = extract_path(cfg, (0, 0), (10, 10))
    p2 = extract_path(cfg, (0, 0), (10, 10))
    assert p1.vertices == p2.vertices


def test_truncation_check_interior_and_boundary():
    cfg = _cfg((-2, -2), (6, 6), ALL_ONES)
    f = distance_field(cfg, [(0, 0)])
    b = distance_field(cfg, [(4, 0)])
    assert truncation_check(f, b)
    # source on the boundary: the minimum over the boundary equals the optimum
    f2 = distance_field(cfg, [(-2, 0)])
    b2 = distance_field(cfg, [(4, 0)])
    assert not truncation_check(f2, b2)


def test_triangle_inequality_and_symmetry():
    cfg = _cfg((0, 0), (10, 10), WeightLaw(0, 1, 0.25), seed=2)
    pts = [(0, 0), (10, 10), (5, 2), (2, 9)]
    fields = {u: distance_field(cfg, [u]) for u in pts}
    for u, v, w in itertools.permutations(pts, 3):
        assert fields[u].at(v) <= fields[u].at(w) + fields[w].at(v)
    for u, v in itertools.combinations(pts, 2):
        assert fields[u].at(v) == fields[v].at(u)


def test_passage_times_monotone_under_coupled_p():
    box = BoxSpec(lo=(0, 0), hi=(12, 12))
    for seed in range(3):
        lo = sample_config(box, WeightLaw(0, 1, 0.2), seed, 0)
        hi = sample_config(box, WeightLaw(0, 1, 0.5), seed, 0)
        flo = distance_field(lo, [(0, 0)])
        fhi = distance_field(hi, [(0, 0)])
        assert np.all(fhi.dist <= flo.dist)


def test_union_edges_consistent_with_vertices():
    # an edge member's endpoints are vertex members
    cfg = _cfg((0, 0), (12, 12), WeightLaw(0, 1, 0.3), seed=4)
    gs = geodesic_union(cfg, (0, 0), (12, 12))
    for k, mask in enumerate(gs.edge_masks):
        idx = np.argwhere(mask)
        for base in idx:
            far = base.copy()
            far[k] += 1
            assert gs.vertex_mask[tuple(base)]
            assert gs.vertex_mask[tuple(far)]
