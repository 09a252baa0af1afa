"""Neighbor migration planning: handover, west-neighbor syncs, border advance.

Every step of a period's migration is derivable locally from the topology
and the period number, so no trigger messages are needed.  The plan is
computed against the outgoing window: the handover target must already
hold current state, which entering nodes do not until their sync runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .leadership import elect_leader
from .topology import (
    Direction,
    GridCoord,
    ServiceAreaSpec,
    ServiceAreaWindow,
    TorusTopology,
    membership_delta,
    service_area_at,
)


@dataclass(frozen=True)
class SyncPair:
    entering: GridCoord
    source: GridCoord  # west neighbor, already inside the outgoing window


@dataclass(frozen=True)
class MigrationPlan:
    period: int
    window_before: ServiceAreaWindow
    window_after: ServiceAreaWindow
    handover: tuple[GridCoord, GridCoord] | None  # (old leader, new leader)
    handover_after_sync: bool  # target enters this period, so it syncs first
    sync_pairs: tuple[SyncPair, ...]
    entering: frozenset[GridCoord]
    exiting: frozenset[GridCoord]


def plan_period_migration(
    period: int,
    spec: ServiceAreaSpec,
    topo: TorusTopology,
    current_leader: GridCoord,
    leader_row_plane: int,
    responsive: Callable[[GridCoord], bool] | None = None,
) -> MigrationPlan:
    """Plan the advance into `period` from `period - 1`."""
    window_before = service_area_at(period - 1, spec, topo)
    window_after = service_area_at(period, spec, topo)
    entering, exiting = membership_delta(period, spec, topo)

    handover = None
    handover_after_sync = False
    if current_leader in exiting:
        # Elected from the outgoing window: entering nodes have not synced
        # yet, so the east-most node of the current SA takes over.
        new_leader = elect_leader(window_before, leader_row_plane, topo, responsive)
        if new_leader == current_leader:
            # Single-column window: the only current candidate is the one
            # leaving, so the entering node takes over once it has synced.
            new_leader = elect_leader(window_after, leader_row_plane, topo, responsive)
            handover_after_sync = True
        handover = (current_leader, new_leader)

    pairs = tuple(
        SyncPair(entering=c, source=topo.neighbor(c, Direction.WEST))
        for c in sorted(entering)
    )
    for pair in pairs:
        assert pair.source in window_before.members, (
            f"sync source {pair.source} for {pair.entering} not in outgoing window"
        )
    return MigrationPlan(
        period=period,
        window_before=window_before,
        window_after=window_after,
        handover=handover,
        handover_after_sync=handover_after_sync,
        sync_pairs=pairs,
        entering=entering,
        exiting=exiting,
    )


def sync_fallback_source(
    pair: SyncPair, topo: TorusTopology, window: ServiceAreaWindow
) -> GridCoord | None:
    """One westward fallback when the primary sync source is unresponsive."""
    candidate = topo.neighbor(pair.source, Direction.WEST)
    return candidate if candidate in window.members else None
