import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from orbitledger.metrics import MetricsRecorder
from orbitledger.network import Network
from orbitledger.node import SatelliteNode
from orbitledger.topology import (
    GridCoord,
    ServiceAreaSpec,
    ServiceAreaWindow,
    TorusTopology,
    service_area_at,
)


@pytest.fixture
def topo() -> TorusTopology:
    return TorusTopology(planes=4, slots_per_plane=28)


@dataclass
class StaticCluster:
    """All grid nodes wired to one network, with a fixed service-area window."""

    topo: TorusTopology
    window: ServiceAreaWindow
    network: Network
    metrics: MetricsRecorder
    nodes: dict[GridCoord, SatelliteNode]
    commits: list[tuple[GridCoord, dict]]

    def node(self, plane: int, slot: int) -> SatelliteNode:
        return self.nodes[GridCoord(plane, slot)]

    def members(self) -> list[SatelliteNode]:
        return [self.nodes[c] for c in self.window.sorted_members()]


def make_cluster(
    planes: int = 4,
    slots: int = 28,
    plane_start: int = 0,
    plane_end: int | None = None,
    slot_width: int = 6,
    anchor_slot: int = 0,
    leader: GridCoord | None = None,
    seed: int = 1,
    drop_probability: float = 0.0,
    batch_size: int = 1,
) -> StaticCluster:
    topo = TorusTopology(planes, slots)
    spec = ServiceAreaSpec(
        plane_start=plane_start,
        plane_end=planes - 1 if plane_end is None else plane_end,
        slot_width=slot_width,
        anchor_slot=anchor_slot,
    )
    window = service_area_at(0, spec, topo)
    metrics = MetricsRecorder()
    network = Network(
        topo, seed=seed, drop_probability=drop_probability,
        on_send=metrics.record_send,
    )
    commits: list[tuple[GridCoord, dict]] = []
    nodes: dict[GridCoord, SatelliteNode] = {}
    for coord in topo.coords():
        nodes[coord] = SatelliteNode(
            coord, topo, network,
            window_fn=lambda: window,
            period_fn=lambda: 0,
            seed=seed,
            batch_size=batch_size,
            on_commit=lambda c, tx: commits.append((c, tx)),
        )
        nodes[coord].in_sa = coord in window.members
    if leader is not None:
        nodes[leader].is_leader = True
        nodes[leader].next_seq = 1
        for coord in window.members:
            nodes[coord].known_leader = leader
    return StaticCluster(topo, window, network, metrics, nodes, commits)
