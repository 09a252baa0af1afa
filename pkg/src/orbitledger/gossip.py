"""Service-area epidemic broadcast rule and wraparound greedy routing.

Broadcast: the origin sends to all four neighbors inside the window; a
member seeing an id for the first time processes the payload and forwards
to its three neighbors excluding the arrival direction, skipping
non-members; repeats are dropped.  Routing closes the slot gap along the
shorter east/west arc first, then the plane gap, so in-plane hops are
preferred and the path length equals the torus distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import (
    Direction,
    DIRECTION_ORDER,
    GridCoord,
    ServiceAreaWindow,
    TorusTopology,
    ConfigError,
)


@dataclass
class GossipState:
    """Per-node dedup memory; ids are retained for two periods."""

    seen: dict[str, int] = field(default_factory=dict)

    def first_sight(self, msg_id: str, period: int) -> bool:
        if msg_id in self.seen:
            return False
        self.seen[msg_id] = period
        return True

    def evict(self, current_period: int) -> None:
        """Drop ids older than the previous period."""
        self.seen = {
            mid: p for mid, p in self.seen.items() if p >= current_period - 1
        }


def broadcast_targets(
    origin: GridCoord, window: ServiceAreaWindow, topo: TorusTopology
) -> list[tuple[Direction, GridCoord]]:
    """Origin forwards into all four directions that stay inside the window."""
    return [
        (d, c)
        for d, c in topo.neighbors(origin).items()
        if c in window.members
    ]


def forward_targets(
    node: GridCoord,
    arrival: Direction,
    window: ServiceAreaWindow,
    topo: TorusTopology,
) -> list[tuple[Direction, GridCoord]]:
    """Non-origin members forward everywhere except back where it came from."""
    return [
        (d, c)
        for d, c in topo.neighbors(node).items()
        if d is not arrival and c in window.members
    ]


def route_next_hop(src: GridCoord, dst: GridCoord, topo: TorusTopology) -> GridCoord:
    """One greedy step toward dst: slot gap first (shorter arc), then plane."""
    if src == dst:
        raise ValueError("already at destination")
    w = topo.slots_per_plane
    p = topo.planes
    if src.slot != dst.slot:
        east_gap = (dst.slot - src.slot) % w
        west_gap = (src.slot - dst.slot) % w
        direction = Direction.EAST if east_gap <= west_gap else Direction.WEST
        return topo.neighbor(src, direction)
    south_gap = (dst.plane - src.plane) % p
    north_gap = (src.plane - dst.plane) % p
    direction = Direction.SOUTH if south_gap <= north_gap else Direction.NORTH
    return topo.neighbor(src, direction)


def route_path(src: GridCoord, dst: GridCoord, topo: TorusTopology) -> list[GridCoord]:
    """Full greedy hop path from src to dst (exclusive of src)."""
    topo.validate(src)
    topo.validate(dst)
    path: list[GridCoord] = []
    cur = src
    while cur != dst:
        cur = route_next_hop(cur, dst, topo)
        path.append(cur)
    return path


def route_to_sa_entry(
    src: GridCoord, window: ServiceAreaWindow, topo: TorusTopology
) -> GridCoord:
    """The window member a message from src enters the service area at.

    Members short-circuit to themselves.  When the window spans all planes
    the entry is on src's own plane (only in-plane hops are needed); ties
    break toward the smaller plane index, then the smaller eastward slot
    offset from src.
    """
    if not window.members:
        raise ConfigError("empty service-area window")
    if src in window.members:
        return src
    if len(window.planes) == topo.planes:
        candidates = [c for c in window.members if c.plane == src.plane]
    else:
        candidates = list(window.members)

    def rank(c: GridCoord) -> tuple[int, int, int]:
        return (
            topo.torus_distance(src, c),
            c.plane,
            (c.slot - src.slot) % topo.slots_per_plane,
        )

    return min(candidates, key=rank)
