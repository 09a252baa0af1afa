"""Per-satellite protocol handler: gossip, execution, ordering, migration.

Each node owns a ledger replica and reacts to delivered messages; all
cross-node effects go through the network.  Wire payloads are plain dicts
(schemas in docs/protocol.md) so replicas never share mutable objects.

Message kinds on the wire:
  execute flow   transit hops are route_execute, the delivering hop is
                 execute_transactions (the node being asked to execute);
  order flow     every hop is order_transaction;
  handover flow  every hop is leader_handover;
  sync           sync_blocks request west, sync_state payload back east.
"""

from __future__ import annotations

import copy
from typing import Callable

from .contracts import (
    ContractInvocation,
    InvocationError,
    invoke_contract,
)
from .gossip import (
    GossipState,
    broadcast_targets,
    forward_targets,
    route_next_hop,
    route_to_sa_entry,
)
from .ledger import (
    ExecutionFailure,
    Replica,
    ScratchState,
    Transaction,
    STATUS_ORDERED,
    STATUS_REJECTED,
)
from .network import Message, MessageKind, Network, ProtocolViolation
from .topology import GridCoord, ServiceAreaWindow, TorusTopology

PENDING_ORDER_LIMIT = 10_000

_FLOW_TRANSIT = {
    "execute": MessageKind.ROUTE_EXECUTE,
    "order": MessageKind.ORDER_TRANSACTION,
    "handover": MessageKind.LEADER_HANDOVER,
}
_FLOW_FINAL = {
    "execute": MessageKind.EXECUTE_TRANSACTIONS,
    "order": MessageKind.ORDER_TRANSACTION,
    "handover": MessageKind.LEADER_HANDOVER,
}


class SatelliteNode:
    def __init__(
        self,
        coord: GridCoord,
        topo: TorusTopology,
        network: Network,
        window_fn: Callable[[], ServiceAreaWindow],
        period_fn: Callable[[], int],
        seed: int = 0,
        batch_size: int = 1,
        on_migration: Callable[[GridCoord], None] | None = None,
        on_commit: Callable[[GridCoord, dict], None] | None = None,
    ) -> None:
        self.coord = coord
        self.topo = topo
        self.network = network
        self.window_fn = window_fn
        self.period_fn = period_fn
        self.seed = seed
        self.batch_size = batch_size
        self.replica = Replica(coord, on_commit=on_commit)
        self.gossip_state = GossipState()
        self.in_sa = False
        self.is_leader = False
        self.known_leader: GridCoord | None = None
        self.next_seq = 1  # meaningful only while leader
        self.pending_order: list[dict] = []
        self.responsive = True
        self.on_migration = on_migration
        self.last_sync_applied = 0
        network.register(coord, self.handle)

    # ------------------------------------------------------------------
    # dispatch

    def handle(self, msg: Message) -> None:
        kind = msg.kind
        if kind is MessageKind.GOSSIP:
            self._on_gossip(msg)
        elif kind in (MessageKind.ROUTE_EXECUTE, MessageKind.EXECUTE_TRANSACTIONS,
                      MessageKind.ORDER_TRANSACTION, MessageKind.LEADER_HANDOVER):
            self._on_routed(msg)
        elif kind is MessageKind.SYNC_BLOCKS:
            self._on_sync_request(msg)
        elif kind is MessageKind.SYNC_STATE:
            self._on_sync_payload(msg)
        else:
            raise ProtocolViolation(f"{self.coord}: unhandled kind {kind.value}")

    # ------------------------------------------------------------------
    # routed flows (hop-by-hop relay toward a fixed target)

    def send_routed(self, flow: str, target: GridCoord, body: dict,
                    msg_id: str | None = None, hop_budget: int | None = None) -> None:
        if target == self.coord:
            self._deliver_flow(flow, body)
            return
        nxt = route_next_hop(self.coord, target, self.topo)
        kind = _FLOW_FINAL[flow] if nxt == target else _FLOW_TRANSIT[flow]
        if hop_budget is None:
            hop_budget = 2 * (self.topo.slots_per_plane + self.topo.planes)
        payload = {"type": "routed", "flow": flow, "target": target.as_list(), "body": body}
        self.network.send(self.network.make_message(
            kind, self.coord, nxt, payload, origin=self.coord,
            msg_id=msg_id, hop_budget=hop_budget,
        ))

    def _on_routed(self, msg: Message) -> None:
        env = msg.payload
        target = GridCoord(*env["target"])
        if target != self.coord:
            # transit hop: relay one step closer
            nxt = route_next_hop(self.coord, target, self.topo)
            flow = env["flow"]
            kind = _FLOW_FINAL[flow] if nxt == target else _FLOW_TRANSIT[flow]
            budget = None if msg.hop_budget is None else msg.hop_budget - 1
            self.network.send(self.network.make_message(
                kind, self.coord, nxt, env, origin=msg.origin,
                msg_id=msg.id, hop_budget=budget,
            ))
            return
        self._deliver_flow(env["flow"], env["body"], msg_id=msg.id)

    def _deliver_flow(self, flow: str, body: dict, msg_id: str | None = None) -> None:
        if flow == "execute":
            self._on_execute(body, msg_id=msg_id)
        elif flow == "order":
            self._on_order(body)
        elif flow == "handover":
            self._on_handover(body)
        else:
            raise ProtocolViolation(f"{self.coord}: unknown flow {flow!r}")

    # ------------------------------------------------------------------
    # transaction execution (step 2) and forwarding to the leader (step 3)

    def submit_execute(self, items: list[dict]) -> None:
        """Client entry point: execute here if inside the SA, else route in."""
        if self.in_sa:
            self._on_execute({"items": items})
            return
        window = self.window_fn()
        entry = route_to_sa_entry(self.coord, window, self.topo)
        self.send_routed("execute", entry, {"items": items},
                         msg_id=self.network.new_message_id("exe"))

    def _on_execute(self, body: dict, msg_id: str | None = None) -> None:
        window = self.window_fn()
        if not self.in_sa:
            # e.g. the window moved past this node; push the request into
            # the current service area instead of executing it here.
            entry = route_to_sa_entry(self.coord, window, self.topo)
            self.send_routed("execute", entry, body, msg_id=msg_id)
            return
        batch_scratch = ScratchState(self.replica.state)
        executed: list[dict] = []
        for item in body["items"]:
            trial = ScratchState(batch_scratch)
            tx_id = item["tx_id"]
            try:
                if "invocation" in item:
                    inv = ContractInvocation.from_dict(item["invocation"])
                    tx = invoke_contract(inv, trial, tx_id, seed=self.seed)
                    tx.submitter = self.coord
                else:
                    tx = Transaction.from_dict({"tx_id": tx_id, "ops": item["ops"]})
                    tx.submitter = self.coord
                    for op in tx.ops:
                        if op.op_kind == "read":
                            _, version = trial.read(op.key)
                            op.read_version = version
                        else:
                            trial.write(op.key, op.value)
            except (ExecutionFailure, InvocationError) as exc:
                # Rejected locally; never forwarded for ordering.
                self.replica.tx_status[tx_id] = {
                    "status": STATUS_REJECTED,
                    "reason": str(exc),
                }
                continue
            batch_scratch.absorb(trial)
            tx.status = "executed"
            self.replica.tx_status[tx_id] = {"status": "executed"}
            executed.append(tx.as_dict())
        if executed:
            self._forward_for_ordering(executed)

    def _forward_for_ordering(self, tx_dicts: list[dict]) -> None:
        if self.is_leader:
            self._leader_order(tx_dicts)
        elif self.known_leader is not None:
            self.send_routed("order", self.known_leader, {"txs": tx_dicts})
        else:
            if len(self.pending_order) + len(tx_dicts) > PENDING_ORDER_LIMIT:
                raise ProtocolViolation(f"{self.coord}: pending-order buffer overflow")
            self.pending_order.extend(tx_dicts)

    # ------------------------------------------------------------------
    # ordering and broadcast (steps 4-5)

    def _on_order(self, body: dict) -> None:
        txs = body["txs"]
        if self.is_leader:
            self._leader_order(txs)
            return
        if self.known_leader is not None and self.known_leader != self.coord:
            # Stale leader: forward to the successor.
            self.send_routed("order", self.known_leader, body)
            return
        if len(self.pending_order) + len(txs) > PENDING_ORDER_LIMIT:
            raise ProtocolViolation(f"{self.coord}: pending-order buffer overflow")
        self.pending_order.extend(txs)

    def _leader_order(self, tx_dicts: list[dict]) -> None:
        ordered: list[dict] = []
        for tx in tx_dicts:
            tx = dict(tx)
            tx["seq"] = self.next_seq
            self.next_seq += 1
            ordered.append(tx)
        for i in range(0, len(ordered), self.batch_size):
            self.gossip_broadcast({"type": "ordered_batch", "txs": ordered[i:i + self.batch_size]})

    def gossip_broadcast(self, payload: dict) -> None:
        """Originate a gossip flood in the current window (leader self-delivers)."""
        window = self.window_fn()
        msg_id = self.network.new_message_id("gsp")
        self.gossip_state.first_sight(msg_id, self.period_fn())
        self._process_gossip_payload(payload)
        for _, nbr in broadcast_targets(self.coord, window, self.topo):
            self.network.send(self.network.make_message(
                MessageKind.GOSSIP, self.coord, nbr, payload,
                origin=self.coord, msg_id=msg_id,
            ))

    # ------------------------------------------------------------------
    # gossip reception

    def _on_gossip(self, msg: Message) -> None:
        if not self.gossip_state.first_sight(msg.id, self.period_fn()):
            return  # previously seen: dropped, not propagated again
        self._process_gossip_payload(msg.payload)
        window = self.window_fn()
        for _, nbr in forward_targets(self.coord, msg.arrival_direction, window, self.topo):
            self.network.send(self.network.make_message(
                MessageKind.GOSSIP, self.coord, nbr, msg.payload,
                origin=msg.origin, msg_id=msg.id,
            ))

    def _process_gossip_payload(self, payload: dict) -> None:
        if payload["type"] == "ordered_batch":
            for tx in payload["txs"]:
                tx = copy.deepcopy(tx)
                tx["status"] = STATUS_ORDERED
                self.replica.receive_ordered(tx)
        elif payload["type"] == "leader_announce":
            self.known_leader = GridCoord(*payload["leader"])
            if self.pending_order and not self.is_leader:
                buffered, self.pending_order = self.pending_order, []
                self._forward_for_ordering(buffered)
        else:
            raise ProtocolViolation(f"{self.coord}: unknown gossip payload {payload['type']!r}")

    # ------------------------------------------------------------------
    # leader handover and announcement (migration step 1)

    def start_handover(self, new_leader: GridCoord) -> None:
        if not self.is_leader:
            raise ProtocolViolation(f"{self.coord} is not the leader")
        body = {"next_seq": self.next_seq, "pending": list(self.pending_order)}
        self.pending_order = []
        self.is_leader = False
        self.known_leader = new_leader  # in-flight traffic gets forwarded
        self.send_routed("handover", new_leader, body,
                         msg_id=self.network.new_message_id("hov"))

    def _on_handover(self, body: dict) -> None:
        self.is_leader = True
        self.next_seq = body["next_seq"]
        self.known_leader = self.coord
        self.announce_leadership()
        pending = body.get("pending", [])
        if pending:
            self._leader_order(pending)
        if self.pending_order:
            buffered, self.pending_order = self.pending_order, []
            self._leader_order(buffered)

    def announce_leadership(self) -> None:
        """Gossip the leader identity within the service area (counted as gossip)."""
        self.gossip_broadcast({"type": "leader_announce", "leader": self.coord.as_list()})

    # ------------------------------------------------------------------
    # neighbor migration sync (step 2): single-hop west-neighbor exchange

    def request_sync(self, source: GridCoord) -> None:
        """Ask the west neighbor for everything after our last known block."""
        payload = {
            "type": "sync_request",
            "chain_length": len(self.replica.chain),
            "requester": self.coord.as_list(),
        }
        self.network.send(self.network.make_message(
            MessageKind.SYNC_BLOCKS, self.coord, source, payload,
            msg_id=self.network.new_message_id("syb"),
        ))

    def _on_sync_request(self, msg: Message) -> None:
        req = msg.payload
        payload = {
            "type": "sync_payload",
            "schema": "sync/1",
            "blocks": self.replica.chain.suffix_after(req["chain_length"]),
            "state": self.replica.state.snapshot(),
            "next_expected_seq": self.replica.next_expected_seq,
            "leader": self.known_leader.as_list() if self.known_leader else None,
        }
        self.network.send(self.network.make_message(
            MessageKind.SYNC_STATE, self.coord, GridCoord(*req["requester"]), payload,
            msg_id=self.network.new_message_id("sys"),
        ))

    def _on_sync_payload(self, msg: Message) -> None:
        payload = msg.payload
        self.last_sync_applied = self.replica.apply_sync(payload)
        if payload.get("leader"):
            self.known_leader = GridCoord(*payload["leader"])
        if self.on_migration is not None:
            self.on_migration(self.coord)

    # ------------------------------------------------------------------

    def evict_gossip_memory(self) -> None:
        self.gossip_state.evict(self.period_fn())
