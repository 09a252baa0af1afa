import pytest

from orbitledger.topology import (
    ConfigError,
    Direction,
    GridCoord,
    InvalidCoordinate,
    ServiceAreaSpec,
    TorusTopology,
    membership_delta,
    neighbors,
    service_area_at,
    torus_distance,
)

from oracles import bfs_distances


def test_neighbors_wraparound_at_origin(topo):
    n = neighbors(GridCoord(0, 0), topo)
    assert n[Direction.WEST] == GridCoord(0, 27)
    assert n[Direction.EAST] == GridCoord(0, 1)
    assert n[Direction.NORTH] == GridCoord(3, 0)
    assert n[Direction.SOUTH] == GridCoord(1, 0)


def test_neighbors_interior(topo):
    assert neighbors(GridCoord(2, 13), topo)[Direction.EAST] == GridCoord(2, 14)


def test_neighbors_always_four(topo):
    for c in topo.coords():
        n = neighbors(c, topo)
        assert len(n) == 4


def test_neighbor_involution_exhaustive(topo):
    # east-then-west and north-then-south return the origin for all 112 coords
    for c in topo.coords():
        n = neighbors(c, topo)
        assert neighbors(n[Direction.EAST], topo)[Direction.WEST] == c
        assert neighbors(n[Direction.NORTH], topo)[Direction.SOUTH] == c


def test_invalid_coordinate_rejected(topo):
    with pytest.raises(InvalidCoordinate):
        neighbors(GridCoord(4, 0), topo)
    with pytest.raises(InvalidCoordinate):
        neighbors(GridCoord(0, 28), topo)


def test_degenerate_grid_warns():
    with pytest.warns(UserWarning):
        TorusTopology(planes=2, slots_per_plane=5)


def test_distance_identity_and_wraparound(topo):
    a = GridCoord(2, 5)
    assert torus_distance(a, a, topo) == 0
    assert torus_distance(GridCoord(0, 0), GridCoord(0, 27), topo) == 1


def test_distance_matches_bfs_all_pairs(topo):
    # the closed form must equal shortest paths on the neighbor graph
    for start in topo.coords():
        oracle = bfs_distances(4, 28, (start.plane, start.slot))
        for other in topo.coords():
            assert torus_distance(start, other, topo) == oracle[(other.plane, other.slot)]


def test_distance_symmetry(topo):
    a, b = GridCoord(1, 3), GridCoord(3, 20)
    assert torus_distance(a, b, topo) == torus_distance(b, a, topo)


@pytest.fixture
def demo_spec() -> ServiceAreaSpec:
    return ServiceAreaSpec(plane_start=0, plane_end=3, slot_width=6, anchor_slot=0)


def test_window_period_zero(topo, demo_spec):
    window = service_area_at(0, demo_spec, topo)
    assert len(window.members) == 24
    assert window.slots(topo) == [0, 1, 2, 3, 4, 5]
    for plane in range(4):
        for slot in range(6):
            assert GridCoord(plane, slot) in window


def test_window_full_cycle_periodicity(topo, demo_spec):
    assert service_area_at(28, demo_spec, topo).members == service_area_at(0, demo_spec, topo).members


def test_window_one_slot_shift(topo, demo_spec):
    window = service_area_at(1, demo_spec, topo)
    assert window.slots(topo) == [1, 2, 3, 4, 5, 6]
    assert window.west_edge_slot == 1
    assert window.east_edge_slot == 6


def test_window_size_invariant_over_periods(topo, demo_spec):
    sizes = {len(service_area_at(p, demo_spec, topo).members) for p in range(60)}
    assert sizes == {24}


def test_window_width_must_fit(topo):
    spec = ServiceAreaSpec(plane_start=0, plane_end=3, slot_width=29)
    with pytest.raises(ConfigError):
        service_area_at(0, spec, topo)


def test_membership_delta_counts(topo, demo_spec):
    for period in range(1, 29):
        entering, exiting = membership_delta(period, demo_spec, topo)
        assert len(entering) == 4
        assert len(exiting) == 4
    # one-slot shift over a full evaluation: 28 periods x 10 cycles x 4 planes
    total = sum(
        len(membership_delta(p, demo_spec, topo)[0]) for p in range(1, 281)
    )
    assert total == 1120


def test_membership_delta_full_ring_is_empty(topo):
    spec = ServiceAreaSpec(plane_start=0, plane_end=3, slot_width=28)
    entering, exiting = membership_delta(5, spec, topo)
    assert entering == frozenset() and exiting == frozenset()


def test_entering_nodes_have_west_neighbor_in_previous_window(topo, demo_spec):
    for period in range(1, 29):
        prev = service_area_at(period - 1, demo_spec, topo)
        entering, _ = membership_delta(period, demo_spec, topo)
        for c in entering:
            west = topo.neighbor(c, Direction.WEST)
            assert west in prev.members


def test_partial_plane_range_window(topo):
    spec = ServiceAreaSpec(plane_start=1, plane_end=2, slot_width=3, anchor_slot=26)
    window = service_area_at(0, spec, topo)
    assert len(window.members) == 6
    assert window.slots(topo) == [26, 27, 0]  # wraps the slot seam
    assert GridCoord(1, 0) in window and GridCoord(0, 27) not in window
