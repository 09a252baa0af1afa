"""Deterministic discrete-event transport restricted to single-hop ISL links.

Messages travel only between grid neighbors; every send is counted as one
message of its kind (one count per hop for routed traffic).  Delivery order
is totally ordered by (virtual tick, enqueue sequence), so identical seeds
and inputs replay identically.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from .topology import Direction, GridCoord, TorusTopology


class ProtocolViolation(RuntimeError):
    """A node attempted something the link layer forbids."""


class LivelockError(RuntimeError):
    """Event processing exceeded the configured tick bound."""


class MessageKind(str, Enum):
    # The first six values match the message accounting categories used in
    # the evaluation reports.
    GOSSIP = "gossip"
    ROUTE_EXECUTE = "route_execute"
    EXECUTE_TRANSACTIONS = "execute_transactions"
    ORDER_TRANSACTION = "order_transaction"
    SYNC_BLOCKS = "sync_blocks"
    SYNC_STATE = "sync_state"
    LEADER_HANDOVER = "leader_handover"
    CLIENT_QUERY = "client_query"


ACCOUNTED_KINDS: tuple[MessageKind, ...] = tuple(MessageKind)


@dataclass(frozen=True)
class Message:
    """Single-hop envelope.  dst must be one of src's four neighbors.

    `id` is preserved across forwarding hops of one logical broadcast or
    route; `origin` is the node that started the flow; `arrival_direction`
    is the direction the receiver sees the message coming from.
    """

    id: str
    kind: MessageKind
    src: GridCoord
    dst: GridCoord
    origin: GridCoord
    arrival_direction: Direction
    payload: Any
    hop_budget: int | None = None


@dataclass
class TraceRecord:
    tick: int
    kind: MessageKind
    src: GridCoord
    dst: GridCoord
    id: str

    def as_dict(self) -> dict:
        return {
            "tick": self.tick,
            "kind": self.kind.value,
            "src": self.src.as_list(),
            "dst": self.dst.as_list(),
            "id": self.id,
        }


@dataclass
class EventQueue:
    """(tick, sequence)-ordered message queue; pops are deterministic."""

    _heap: list[tuple[int, int, Message]] = field(default_factory=list)
    _seq: "itertools.count[int]" = field(default_factory=itertools.count)

    def push(self, tick: int, msg: Message) -> None:
        heapq.heappush(self._heap, (tick, next(self._seq), msg))

    def pop(self) -> tuple[int, Message]:
        tick, _, msg = heapq.heappop(self._heap)
        return tick, msg

    def __len__(self) -> int:
        return len(self._heap)


Handler = Callable[[Message], None]
SendObserver = Callable[[MessageKind, GridCoord, GridCoord], None]


class Network:
    """Event loop delivering messages between registered node handlers."""

    def __init__(
        self,
        topo: TorusTopology,
        seed: int = 0,
        link_delay: int = 1,
        drop_probability: float = 0.0,
        max_ticks: int = 1_000_000,
        on_send: SendObserver | None = None,
        keep_trace: bool = True,
    ) -> None:
        if not 0.0 <= drop_probability <= 1.0:
            raise ValueError(f"drop_probability {drop_probability} outside [0,1]")
        self.topo = topo
        self.link_delay = link_delay
        self.drop_probability = drop_probability
        self.max_ticks = max_ticks
        self.rng = random.Random(seed)
        self.now = 0
        self.queue = EventQueue()
        self.handlers: dict[GridCoord, Handler] = {}
        self.on_send = on_send
        self.trace: list[TraceRecord] = []
        self.keep_trace = keep_trace
        self._msg_counter = itertools.count(1)
        self.sends = 0
        self.deliveries = 0

    def register(self, coord: GridCoord, handler: Handler) -> None:
        self.topo.validate(coord)
        self.handlers[coord] = handler

    def new_message_id(self, prefix: str) -> str:
        return f"{prefix}-{next(self._msg_counter):06d}"

    def arrival_direction(self, src: GridCoord, dst: GridCoord) -> Direction:
        """Direction from which dst sees a message sent by src."""
        for d, c in self.topo.neighbors(dst).items():
            if c == src:
                return d
        raise ProtocolViolation(f"{src}->{dst} is not a neighbor link")

    def make_message(
        self,
        kind: MessageKind,
        src: GridCoord,
        dst: GridCoord,
        payload: Any,
        origin: GridCoord | None = None,
        msg_id: str | None = None,
        hop_budget: int | None = None,
    ) -> Message:
        return Message(
            id=msg_id or self.new_message_id(kind.value[:3]),
            kind=kind,
            src=src,
            dst=dst,
            origin=origin or src,
            arrival_direction=self.arrival_direction(src, dst),
            payload=payload,
            hop_budget=hop_budget,
        )

    def send(self, msg: Message) -> None:
        """Enqueue one single-hop message; counts exactly one message."""
        if msg.dst not in self.topo.neighbors(msg.src).values():
            raise ProtocolViolation(
                f"send {msg.kind.value} {msg.src}->{msg.dst}: dst is not a neighbor"
            )
        if msg.hop_budget is not None and msg.hop_budget <= 0:
            raise ProtocolViolation(f"message {msg.id} exhausted its hop budget")
        self.sends += 1
        if self.on_send is not None:
            self.on_send(msg.kind, msg.src, msg.dst)
        if self.drop_probability > 0.0 and self.rng.random() < self.drop_probability:
            return  # lost in transit; the send is still counted
        self.queue.push(self.now + self.link_delay, msg)

    def run_until_quiescent(self) -> int:
        """Process events until none remain; returns virtual ticks elapsed."""
        start = self.now
        while len(self.queue):
            tick, msg = self.queue.pop()
            if tick - start > self.max_ticks:
                raise LivelockError(
                    f"exceeded {self.max_ticks} ticks with {len(self.queue) + 1} "
                    f"events pending (last: {msg.kind.value} {msg.src}->{msg.dst})"
                )
            self.now = tick
            self.deliveries += 1
            if self.keep_trace:
                self.trace.append(TraceRecord(tick, msg.kind, msg.src, msg.dst, msg.id))
            handler = self.handlers.get(msg.dst)
            if handler is None:
                raise ProtocolViolation(f"no handler registered at {msg.dst}")
            handler(msg)
        return self.now - start

    def trace_lines(self) -> list[dict]:
        return [rec.as_dict() for rec in self.trace]
