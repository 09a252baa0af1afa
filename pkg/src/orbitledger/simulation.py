"""Full-constellation simulation: nodes, period loop, migration, workload.

The period sequence follows the migration protocol: leader handover first
(within the outgoing window), then the west-neighbor syncs for entering
nodes (all pairs concurrently), then the border advance.  Each stage runs
to event-loop quiescence, so observable states are period-aligned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ledger import quorum_read
from .leadership import elect_leader
from .metrics import MetricsRecorder
from .migration import MigrationPlan, plan_period_migration
from .network import Network
from .node import SatelliteNode
from .topology import (
    GridCoord,
    ServiceAreaSpec,
    ServiceAreaWindow,
    TorusTopology,
    service_area_at,
)


class InvariantViolation(RuntimeError):
    """A protocol invariant failed during the run."""


ROLE_OUTSIDE = "outside"
ROLE_SA = "sa"
ROLE_LEADER_ROW = "leader_row"
ROLE_LEADER = "leader"


@dataclass
class SimConfig:
    planes: int = 4
    slots_per_plane: int = 28
    plane_start: int = 0
    plane_end: int = 3
    slot_width: int = 6
    anchor_slot: int = 0
    leader_row_plane: int = 1
    seed: int = 1
    batch_size: int = 1
    drop_probability: float = 0.0
    migrations_enabled: bool = True
    check_convergence: bool = True
    sync_trigger: str = "external"  # or "internal"; wire traffic is identical
    keep_trace: bool = True


class Simulation:
    def __init__(self, cfg: SimConfig) -> None:
        self.cfg = cfg
        self.topo = TorusTopology(cfg.planes, cfg.slots_per_plane)
        self.spec = ServiceAreaSpec(
            plane_start=cfg.plane_start,
            plane_end=cfg.plane_end,
            slot_width=cfg.slot_width,
            anchor_slot=cfg.anchor_slot,
        )
        self.spec.validate(self.topo)
        if not cfg.plane_start <= cfg.leader_row_plane <= cfg.plane_end:
            raise ValueError(
                f"leader row plane {cfg.leader_row_plane} outside SA plane range"
            )
        self.metrics = MetricsRecorder()
        self.network = Network(
            self.topo,
            seed=cfg.seed,
            drop_probability=cfg.drop_probability,
            on_send=self.metrics.record_send,
            keep_trace=cfg.keep_trace,
        )
        self.period = 0
        self.window: ServiceAreaWindow = service_area_at(0, self.spec, self.topo)
        self.nodes: dict[GridCoord, SatelliteNode] = {}
        for coord in self.topo.coords():
            self.nodes[coord] = SatelliteNode(
                coord,
                self.topo,
                self.network,
                window_fn=lambda: self.window,
                period_fn=lambda: self.period,
                seed=cfg.seed,
                batch_size=cfg.batch_size,
                on_migration=self._note_sync,
                on_commit=self._on_commit,
            )
        self.leader: GridCoord | None = None
        self.leader_changes: list[tuple[int, GridCoord, GridCoord]] = []
        self.convergence_violations: list[str] = []
        self.global_commits: dict[int, str] = {}
        self._synced_this_period: set[GridCoord] = set()
        self._bootstrap()

    # ------------------------------------------------------------------

    def _bootstrap(self) -> None:
        # The period-0 leader needs no announcement: every member derives the
        # east-most leader-row node from the window alone, without messages.
        leader = elect_leader(self.window, self.cfg.leader_row_plane, self.topo)
        for coord in self.window.members:
            self.nodes[coord].in_sa = True
            self.nodes[coord].known_leader = leader
        node = self.nodes[leader]
        node.is_leader = True
        node.next_seq = 1
        self.leader = leader

    def _note_sync(self, coord: GridCoord) -> None:
        self.metrics.record_migration(coord)
        self._synced_this_period.add(coord)

    def _on_commit(self, coord: GridCoord, tx: dict) -> None:
        self.metrics.record_commit(coord, tx)
        seq, tx_id = tx["seq"], tx["tx_id"]
        known = self.global_commits.get(seq)
        if known is None:
            self.global_commits[seq] = tx_id
        elif known != tx_id:
            raise InvariantViolation(f"seq {seq} committed as {known} and {tx_id}")

    def global_committed_log(self) -> list[tuple[int, str]]:
        """Distinct committed transactions in sequence order, constellation-wide."""
        return sorted(self.global_commits.items())

    # ------------------------------------------------------------------
    # period machinery

    def plan_next_migration(self) -> MigrationPlan:
        responsive = lambda c: self.nodes[c].responsive
        return plan_period_migration(
            self.period + 1,
            self.spec,
            self.topo,
            current_leader=self.leader,
            leader_row_plane=self.cfg.leader_row_plane,
            responsive=responsive,
        )

    def advance_period(self) -> MigrationPlan | None:
        """Run one neighbor migration and move the window one slot east."""
        if not self.cfg.migrations_enabled:
            self.period += 1
            self.metrics.record_period(self.spec.cycle_periods(self.topo))
            return None
        plan = self.plan_next_migration()
        self._synced_this_period = set()

        def run_handover() -> None:
            old, new = plan.handover
            self.nodes[old].start_handover(new)
            self.network.run_until_quiescent()
            self.leader_changes.append((plan.period, old, new))
            self.leader = new

        if plan.handover and not plan.handover_after_sync:
            run_handover()

        for pair in plan.sync_pairs:
            # Trigger mode only decides who initiates; the wire exchange is
            # always one sync_blocks request west, one sync_state back.
            self.nodes[pair.entering].request_sync(pair.source)
        self.network.run_until_quiescent()
        if self.cfg.drop_probability == 0.0:
            missing = {p.entering for p in plan.sync_pairs} - self._synced_this_period
            if missing:
                raise InvariantViolation(f"period {plan.period}: unsynced entrants {sorted(missing)}")

        if plan.handover and plan.handover_after_sync:
            run_handover()

        # Border advance: entering nodes turn active, west-most drop out and
        # keep their chain frozen at exit height for the next cycle's delta.
        self.period = plan.period
        self.window = plan.window_after
        for coord in plan.exiting:
            self.nodes[coord].in_sa = False
        for coord in plan.entering:
            self.nodes[coord].in_sa = True
        for node in self.nodes.values():
            node.evict_gossip_memory()
        self.metrics.record_period(self.spec.cycle_periods(self.topo))
        self._check_single_leader()
        return plan

    def _check_single_leader(self) -> None:
        leaders = sorted(c for c, n in self.nodes.items() if n.is_leader)
        if len(leaders) != 1 or leaders[0] != self.leader:
            raise InvariantViolation(
                f"period {self.period}: leader bookkeeping {self.leader} "
                f"vs flags {leaders}"
            )
        if self.leader not in self.window.members:
            raise InvariantViolation(
                f"period {self.period}: leader {self.leader} outside the window"
            )
        if self.leader.plane != self.cfg.leader_row_plane:
            raise InvariantViolation(
                f"period {self.period}: leader {self.leader} off the leader row"
            )

    # ------------------------------------------------------------------
    # workload entry points

    def submit(self, submitter: GridCoord, items: list[dict]) -> None:
        """Inject a client batch at a node (uplink itself is not an ISL hop)."""
        self.nodes[submitter].submit_execute(items)
        self.network.run_until_quiescent()

    def committed_tx(self, tx_id: str) -> dict | None:
        """The committed transaction payload, from a deterministic member."""
        ref = self.nodes[min(self.window.members)].replica
        info = ref.tx_status.get(tx_id)
        if not info or info.get("status") != "committed":
            return None
        return ref.chain.blocks[info["height"]].tx

    def query_tx(self, tx_id: str, coord: GridCoord | None = None) -> dict:
        """Status as seen by one node, or the most definitive status found.

        Committed statuses carry the keys the transaction wrote, so clients
        can watch the accounts they just created.
        """
        if coord is not None:
            info = self.nodes[coord].replica.query_status(tx_id)
            return self._enrich_status(info, self.nodes[coord].replica)
        rank = {"committed": 0, "rejected": 1, "executed": 2, "ordered": 3}
        best = {"status": "unknown"}
        best_replica = None
        for c in sorted(self.nodes):
            info = self.nodes[c].replica.query_status(tx_id)
            if info["status"] == "unknown":
                continue
            if rank.get(info["status"], 9) < rank.get(best["status"], 10):
                best = info
                best_replica = self.nodes[c].replica
        return self._enrich_status(best, best_replica)

    @staticmethod
    def _enrich_status(info: dict, replica) -> dict:
        if replica is not None and info.get("status") == "committed":
            tx = replica.chain.blocks[info["height"]].tx
            info = dict(info)
            info["keys_written"] = sorted(
                {op["key"] for op in tx["ops"] if op["op"] == "write"})
        return info

    def quorum_read(self, key: str, r: int):
        replicas = {c: self.nodes[c].replica for c in self.window.members}
        return quorum_read(key, self.window, replicas, r)

    # ------------------------------------------------------------------
    # invariants and snapshots

    def check_convergence(self) -> None:
        """All members must agree on chain head and state digest."""
        if not self.cfg.check_convergence:
            return
        heads = {}
        digests = {}
        for coord in self.window.sorted_members():
            replica = self.nodes[coord].replica
            heads.setdefault(replica.chain.head_hash, []).append(coord)
            digests.setdefault(replica.state_digest(), []).append(coord)
        if len(heads) > 1 or len(digests) > 1:
            self.convergence_violations.append(
                f"period {self.period}: heads={len(heads)} digests={len(digests)}"
            )

    def role_of(self, coord: GridCoord) -> str:
        if coord == self.leader:
            return ROLE_LEADER
        if coord in self.window.members:
            if coord.plane == self.cfg.leader_row_plane:
                return ROLE_LEADER_ROW
            return ROLE_SA
        return ROLE_OUTSIDE

    def grid_snapshot(self) -> list[dict]:
        out = []
        for coord in self.topo.coords():
            replica = self.nodes[coord].replica
            out.append({
                "plane": coord.plane,
                "slot": coord.slot,
                "role": self.role_of(coord),
                "chain_height": len(replica.chain),
                "state_digest": replica.state_digest(),
            })
        return out

    def member_replicas(self):
        return {c: self.nodes[c].replica for c in self.window.sorted_members()}

    def verify_all_chains(self) -> None:
        for coord in self.window.sorted_members():
            self.nodes[coord].replica.chain.verify()
