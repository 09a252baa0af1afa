"""Leader placement rules: a single ordering leader on the leader row.

Only nodes of one configured orbital plane (the leader row) are eligible.
The leader keeps its role until it leaves the service area; the
replacement is the east-most responsive leader-row node still inside the
service area, probed westward on non-response.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .topology import GridCoord, ServiceAreaWindow, TorusTopology


class ElectionError(RuntimeError):
    """No responsive leader-row node inside the service area."""


@dataclass
class LeaderState:
    leader_row_plane: int
    current_leader: GridCoord
    next_seq: int = 1
    batch_size: int = 1


def leader_row_members(
    window: ServiceAreaWindow, leader_row_plane: int
) -> list[GridCoord]:
    return sorted(c for c in window.members if c.plane == leader_row_plane)


def east_ordered_candidates(
    window: ServiceAreaWindow, leader_row_plane: int, topo: TorusTopology
) -> list[GridCoord]:
    """Leader-row members from east-most to west-most within the window."""
    members = {c.slot for c in window.members if c.plane == leader_row_plane}
    if not members:
        raise ElectionError(
            f"leader row plane {leader_row_plane} does not intersect the window"
        )
    w = topo.slots_per_plane
    ordered = []
    for j in range(window.slot_width):
        slot = (window.east_edge_slot - j) % w
        if slot in members:
            ordered.append(GridCoord(leader_row_plane, slot))
    return ordered


def elect_leader(
    window: ServiceAreaWindow,
    leader_row_plane: int,
    topo: TorusTopology,
    responsive: Callable[[GridCoord], bool] | None = None,
    initiator: GridCoord | None = None,
) -> GridCoord:
    """East-most responsive leader-row member; probes westward on silence.

    The result is a pure function of the window and responsiveness, so it
    is independent of which node initiates the probe.
    """
    del initiator  # any node computes the same outcome
    for candidate in east_ordered_candidates(window, leader_row_plane, topo):
        if responsive is None or responsive(candidate):
            return candidate
    raise ElectionError(
        f"no responsive leader-row node in window at period {window.period}"
    )
