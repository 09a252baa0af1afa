"""Per-hop message accounting and aggregation into evaluation tables.

Every send() increments one (kind, coordinate) counter.  Counts are
attributed to the receiving node: totals per kind are identical either
way, and receiver attribution is what makes the leader-row plane sit
below the other planes in the gossip distribution (the leader originates
broadcasts, so its neighbors all exclude it when forwarding and it
receives none of its own traffic back on first pass).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .network import MessageKind
from .topology import GridCoord, TorusTopology


class EmptySnapshot(ValueError):
    """Proportions of an all-zero snapshot are undefined."""


@dataclass(frozen=True)
class MetricsSnapshot:
    counts: dict[tuple[MessageKind, GridCoord], int]
    totals: dict[MessageKind, int]
    commits: int
    migrations: int
    periods_elapsed: int
    cycles_elapsed: int

    @property
    def total_messages(self) -> int:
        return sum(self.totals.values())


class MetricsRecorder:
    """Append-only counters; snapshots are immutable copies."""

    def __init__(self) -> None:
        self.counts: dict[tuple[MessageKind, GridCoord], int] = {}
        self.totals: dict[MessageKind, int] = {}
        self.commits = 0
        self.migrations = 0
        self.periods_elapsed = 0
        self.cycles_elapsed = 0

    def record_send(self, kind: MessageKind, src: GridCoord, dst: GridCoord) -> None:
        del src  # hops are attributed to the receiving node
        key = (kind, dst)
        self.counts[key] = self.counts.get(key, 0) + 1
        self.totals[kind] = self.totals.get(kind, 0) + 1

    def record_commit(self, coord: GridCoord, tx: dict) -> None:
        del coord, tx
        self.commits += 1

    def record_migration(self, coord: GridCoord) -> None:
        del coord
        self.migrations += 1

    def record_period(self, cycle_length: int) -> None:
        self.periods_elapsed += 1
        self.cycles_elapsed = self.periods_elapsed // cycle_length

    def snapshot(self) -> MetricsSnapshot:
        return MetricsSnapshot(
            counts=dict(self.counts),
            totals=dict(self.totals),
            commits=self.commits,
            migrations=self.migrations,
            periods_elapsed=self.periods_elapsed,
            cycles_elapsed=self.cycles_elapsed,
        )


def proportions(snapshot: MetricsSnapshot) -> dict[str, int]:
    """Integer percentages per kind, as in the evaluation table.

    Rounding means the column can sum to anything in 99-101.
    """
    total = snapshot.total_messages
    if total == 0:
        raise EmptySnapshot("no messages recorded")
    return {
        kind.value: round(100 * count / total)
        for kind, count in sorted(snapshot.totals.items(), key=lambda kv: kv[0].value)
        if count > 0
    }


def distribution(
    snapshot: MetricsSnapshot,
    axis: str,
    kind: MessageKind,
    topo: TorusTopology,
) -> list[int]:
    """Marginal counts along one axis: 'plane' or 'slot'."""
    if axis == "plane":
        out = [0] * topo.planes
        for (k, coord), count in snapshot.counts.items():
            if k is kind:
                out[coord.plane] += count
        return out
    if axis == "slot":
        out = [0] * topo.slots_per_plane
        for (k, coord), count in snapshot.counts.items():
            if k is kind:
                out[coord.slot] += count
        return out
    raise ValueError(f"axis must be 'plane' or 'slot', got {axis!r}")


def linear_fit(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """(slope, intercept, r_squared) of a least-squares line."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def counts_csv(snapshot: MetricsSnapshot) -> str:
    """Comma-separated per-node table: kind, plane, slot, count."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "plane", "slot", "count"])
    rows = sorted(
        ((kind.value, coord.plane, coord.slot, count)
         for (kind, coord), count in snapshot.counts.items()),
    )
    writer.writerows(rows)
    return buf.getvalue()


def summary_dict(snapshot: MetricsSnapshot, seed: int | None = None) -> dict:
    return {
        "schema": "metrics-summary/1",
        "seed": seed,
        "totals": {
            kind.value: count
            for kind, count in sorted(snapshot.totals.items(), key=lambda kv: kv[0].value)
        },
        "total_messages": snapshot.total_messages,
        "proportions_percent": proportions(snapshot) if snapshot.total_messages else {},
        "commits": snapshot.commits,
        "migrations": snapshot.migrations,
        "periods_elapsed": snapshot.periods_elapsed,
        "cycles_elapsed": snapshot.cycles_elapsed,
    }
