"""Torus grid model of the constellation and the moving service-area window.

Node coordinates are fixed; the geo-fixed service area is represented as a
window over grid coordinates that shifts one slot east per period (the
satellites move one step west relative to the ground, so the window over
their fixed coordinates moves east).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterator


class ConfigError(ValueError):
    """Invalid topology or service-area configuration."""


class InvalidCoordinate(ValueError):
    """Coordinate outside the owning topology."""


class Direction(str, Enum):
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]


_OPPOSITE = {
    Direction.NORTH: Direction.SOUTH,
    Direction.SOUTH: Direction.NORTH,
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
}

# Fixed traversal order; every iteration over neighbors must be deterministic.
DIRECTION_ORDER = (Direction.NORTH, Direction.SOUTH, Direction.EAST, Direction.WEST)


@dataclass(frozen=True, order=True)
class GridCoord:
    """Grid position: orbital plane (row) and in-plane slot (column)."""

    plane: int
    slot: int

    def __str__(self) -> str:
        return f"({self.plane},{self.slot})"

    def as_list(self) -> list[int]:
        return [self.plane, self.slot]


@dataclass(frozen=True)
class TorusTopology:
    """A planes x slots_per_plane grid with wraparound in both dimensions."""

    planes: int
    slots_per_plane: int

    def __post_init__(self) -> None:
        if self.planes < 1:
            raise ConfigError(f"planes must be >= 1, got {self.planes}")
        if self.slots_per_plane < 3:
            raise ConfigError(
                f"slots_per_plane must be >= 3, got {self.slots_per_plane}"
            )
        if self.planes < 3:
            warnings.warn(
                f"degenerate torus with {self.planes} plane(s): "
                "north/south neighbors may coincide",
                stacklevel=2,
            )

    @property
    def node_count(self) -> int:
        return self.planes * self.slots_per_plane

    def contains(self, c: GridCoord) -> bool:
        return 0 <= c.plane < self.planes and 0 <= c.slot < self.slots_per_plane

    def validate(self, c: GridCoord) -> None:
        if not self.contains(c):
            raise InvalidCoordinate(f"{c} outside {self.planes}x{self.slots_per_plane} grid")

    def coords(self) -> Iterator[GridCoord]:
        for plane in range(self.planes):
            for slot in range(self.slots_per_plane):
                yield GridCoord(plane, slot)

    def neighbor(self, c: GridCoord, direction: Direction) -> GridCoord:
        self.validate(c)
        if direction is Direction.NORTH:
            return GridCoord((c.plane - 1) % self.planes, c.slot)
        if direction is Direction.SOUTH:
            return GridCoord((c.plane + 1) % self.planes, c.slot)
        if direction is Direction.EAST:
            return GridCoord(c.plane, (c.slot + 1) % self.slots_per_plane)
        return GridCoord(c.plane, (c.slot - 1) % self.slots_per_plane)

    def neighbors(self, c: GridCoord) -> dict[Direction, GridCoord]:
        """The four single-hop ISL neighbors, keyed by direction."""
        return {d: self.neighbor(c, d) for d in DIRECTION_ORDER}

    def slot_distance(self, a: int, b: int) -> int:
        d = abs(a - b)
        return min(d, self.slots_per_plane - d)

    def plane_distance(self, a: int, b: int) -> int:
        d = abs(a - b)
        return min(d, self.planes - d)

    def torus_distance(self, a: GridCoord, b: GridCoord) -> int:
        """Hop count of the shortest path, taking wraparound in both axes."""
        self.validate(a)
        self.validate(b)
        return self.slot_distance(a.slot, b.slot) + self.plane_distance(a.plane, b.plane)


def neighbors(c: GridCoord, topo: TorusTopology) -> dict[Direction, GridCoord]:
    return topo.neighbors(c)


def torus_distance(a: GridCoord, b: GridCoord, topo: TorusTopology) -> int:
    return topo.torus_distance(a, b)


@dataclass(frozen=True)
class ServiceAreaSpec:
    """Geo-fixed service area expressed as a slot window over a plane range.

    The window's west edge sits at anchor_slot at period 0 and moves one slot
    east per period.  plane_start..plane_end is inclusive and contiguous.
    """

    plane_start: int
    plane_end: int
    slot_width: int
    anchor_slot: int = 0
    periods_per_cycle: int | None = None

    def plane_range(self, topo: TorusTopology) -> range:
        if not (0 <= self.plane_start <= self.plane_end < topo.planes):
            raise ConfigError(
                f"plane range [{self.plane_start},{self.plane_end}] invalid "
                f"for {topo.planes} planes"
            )
        return range(self.plane_start, self.plane_end + 1)

    def validate(self, topo: TorusTopology) -> None:
        self.plane_range(topo)
        if not (1 <= self.slot_width <= topo.slots_per_plane):
            raise ConfigError(
                f"slot_width {self.slot_width} outside [1,{topo.slots_per_plane}]"
            )
        if not (0 <= self.anchor_slot < topo.slots_per_plane):
            raise ConfigError(f"anchor_slot {self.anchor_slot} outside grid")

    def cycle_periods(self, topo: TorusTopology) -> int:
        return self.periods_per_cycle or topo.slots_per_plane

    def spans_all_planes(self, topo: TorusTopology) -> bool:
        return self.plane_start == 0 and self.plane_end == topo.planes - 1


@dataclass(frozen=True)
class ServiceAreaWindow:
    """Service-area membership for one period."""

    period: int
    members: frozenset[GridCoord]
    planes: tuple[int, ...]
    west_edge_slot: int
    east_edge_slot: int
    slot_width: int

    def __contains__(self, c: GridCoord) -> bool:
        return c in self.members

    def sorted_members(self) -> list[GridCoord]:
        return sorted(self.members)

    def slots(self, topo: TorusTopology) -> list[int]:
        """Window slot columns, west to east."""
        w = topo.slots_per_plane
        return [(self.west_edge_slot + j) % w for j in range(self.slot_width)]

    def west_column(self) -> tuple[GridCoord, ...]:
        return tuple(GridCoord(p, self.west_edge_slot) for p in self.planes)

    def east_column(self) -> tuple[GridCoord, ...]:
        return tuple(GridCoord(p, self.east_edge_slot) for p in self.planes)


def service_area_at(
    period: int, spec: ServiceAreaSpec, topo: TorusTopology
) -> ServiceAreaWindow:
    """Window membership at the given period; purely local computation."""
    if period < 0:
        raise ConfigError(f"period must be >= 0, got {period}")
    spec.validate(topo)
    w = topo.slots_per_plane
    west = (spec.anchor_slot + period) % w
    east = (west + spec.slot_width - 1) % w
    planes = tuple(spec.plane_range(topo))
    members = frozenset(
        GridCoord(p, (west + j) % w) for p in planes for j in range(spec.slot_width)
    )
    return ServiceAreaWindow(
        period=period,
        members=members,
        planes=planes,
        west_edge_slot=west,
        east_edge_slot=east,
        slot_width=spec.slot_width,
    )


def membership_delta(
    period: int, spec: ServiceAreaSpec, topo: TorusTopology
) -> tuple[frozenset[GridCoord], frozenset[GridCoord]]:
    """(entering, exiting) node sets for the advance into `period`."""
    if period < 1:
        raise ConfigError(f"membership delta needs period >= 1, got {period}")
    prev = service_area_at(period - 1, spec, topo)
    cur = service_area_at(period, spec, topo)
    return cur.members - prev.members, prev.members - cur.members
