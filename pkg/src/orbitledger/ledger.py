"""Per-node replica: hash-chained block log plus versioned key-value state.

Transactions record every read with the version observed and every write
with a full replacement value.  Commit-time validation re-checks the read
versions against current state (optimistic concurrency); transactions that
fail validation consume their sequence number but are not appended to the
chain.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .topology import GridCoord, ServiceAreaWindow

GENESIS_HASH = "0" * 64

STATUS_SUBMITTED = "submitted"
STATUS_EXECUTED = "executed"
STATUS_ORDERED = "ordered"
STATUS_COMMITTED = "committed"
STATUS_REJECTED = "rejected"
STATUS_UNKNOWN = "unknown"


class ExecutionFailure(Exception):
    """Local transaction execution failed; the transaction is rejected."""


class ChainCorruption(RuntimeError):
    """Hash-chain verification failed; the replica is unusable."""


class OrderingViolation(RuntimeError):
    """Two different transactions arrived under one sequence number."""


class ConsistencyViolation(RuntimeError):
    """Replicas disagree at the same version; must never fire fault-free."""


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class Operation:
    """One atomic read or write against the key-value state."""

    op_kind: str  # "read" | "write"
    key: str
    value: Any = None  # writes carry a full replacement value
    read_version: int | None = None  # filled in at execution time for reads

    def as_dict(self) -> dict:
        if self.op_kind == "read":
            return {"op": "read", "key": self.key, "read_version": self.read_version}
        return {"op": "write", "key": self.key, "value": self.value}

    @staticmethod
    def from_dict(d: dict) -> "Operation":
        if d["op"] == "read":
            return Operation("read", d["key"], read_version=d["read_version"])
        return Operation("write", d["key"], value=d["value"])


@dataclass
class Transaction:
    """Ordered list of operations plus lifecycle bookkeeping."""

    tx_id: str
    ops: list[Operation] = field(default_factory=list)
    contract: str | None = None
    submitter: GridCoord | None = None
    seq: int | None = None
    status: str = STATUS_SUBMITTED
    reject_reason: str | None = None

    def as_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "contract": self.contract,
            "submitter": self.submitter.as_list() if self.submitter else None,
            "seq": self.seq,
            "ops": [op.as_dict() for op in self.ops],
        }

    @staticmethod
    def from_dict(d: dict) -> "Transaction":
        sub = d.get("submitter")
        return Transaction(
            tx_id=d["tx_id"],
            ops=[Operation.from_dict(o) for o in d["ops"]],
            contract=d.get("contract"),
            submitter=GridCoord(sub[0], sub[1]) if sub else None,
            seq=d.get("seq"),
            status=STATUS_ORDERED if d.get("seq") is not None else STATUS_SUBMITTED,
        )


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: str
    tx: dict  # canonical transaction payload, ops with versions
    hash: str

    @staticmethod
    def build(height: int, prev_hash: str, tx: dict) -> "Block":
        digest = sha256_hex(
            canonical_json({"height": height, "prev_hash": prev_hash, "tx": tx})
        )
        return Block(height=height, prev_hash=prev_hash, tx=tx, hash=digest)

    def as_dict(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash,
            "tx": self.tx,
            "hash": self.hash,
        }


class Blockchain:
    """Append-only hash-chained log; one replica per service-area node."""

    def __init__(self) -> None:
        self.blocks: list[Block] = []

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def head_hash(self) -> str:
        return self.blocks[-1].hash if self.blocks else GENESIS_HASH

    @property
    def head_height(self) -> int:
        return len(self.blocks) - 1

    def append(self, tx: dict) -> Block:
        block = Block.build(len(self.blocks), self.head_hash, tx)
        self.blocks.append(block)
        return block

    def extend(self, blocks: Iterable[dict]) -> int:
        """Attach serialized blocks after the current head; verifies linkage."""
        added = 0
        for raw in blocks:
            if raw["height"] != len(self.blocks):
                raise ChainCorruption(
                    f"sync block height {raw['height']} != expected {len(self.blocks)}"
                )
            if raw["prev_hash"] != self.head_hash:
                raise ChainCorruption(f"sync block at height {raw['height']} breaks the chain")
            block = Block.build(raw["height"], raw["prev_hash"], raw["tx"])
            if block.hash != raw["hash"]:
                raise ChainCorruption(f"sync block at height {raw['height']} hash mismatch")
            self.blocks.append(block)
            added += 1
        return added

    def verify(self) -> None:
        """Recompute every hash; raises on any mutation."""
        prev = GENESIS_HASH
        for i, block in enumerate(self.blocks):
            if block.height != i or block.prev_hash != prev:
                raise ChainCorruption(f"chain linkage broken at height {i}")
            expected = Block.build(i, prev, block.tx).hash
            if block.hash != expected:
                raise ChainCorruption(f"hash mismatch at height {i}")
            prev = block.hash

    def suffix_after(self, length: int) -> list[dict]:
        return [b.as_dict() for b in self.blocks[length:]]

    def as_dicts(self) -> list[dict]:
        return [b.as_dict() for b in self.blocks]


@dataclass
class StateEntry:
    value: Any
    version: int
    last_block: int


class StateStore:
    """key -> (value, version, height of the block that last wrote it)."""

    def __init__(self) -> None:
        self.entries: dict[str, StateEntry] = {}

    def get(self, key: str) -> StateEntry | None:
        return self.entries.get(key)

    def version(self, key: str) -> int | None:
        entry = self.entries.get(key)
        return entry.version if entry else None

    def apply_write(self, key: str, value: Any, block_height: int) -> int:
        entry = self.entries.get(key)
        version = (entry.version + 1) if entry else 1
        self.entries[key] = StateEntry(copy.deepcopy(value), version, block_height)
        return version

    def snapshot(self) -> dict:
        return {
            key: {
                "value": copy.deepcopy(e.value),
                "version": e.version,
                "last_block": e.last_block,
            }
            for key, e in sorted(self.entries.items())
        }

    def load_snapshot(self, snap: dict) -> None:
        self.entries = {
            key: StateEntry(copy.deepcopy(d["value"]), d["version"], d["last_block"])
            for key, d in snap.items()
        }

    def digest(self) -> str:
        triples = [
            [key, e.version, e.value] for key, e in sorted(self.entries.items())
        ]
        return sha256_hex(canonical_json(triples))


class ScratchState:
    """Copy-on-write overlay used for local execution; the base is untouched.

    A ScratchState can itself serve as the base of another, which gives a
    batch executor per-transaction isolation: run each transaction on a
    trial overlay and fold it into the batch overlay only on success.
    """

    def __init__(self, base: "StateStore | ScratchState") -> None:
        self.base = base
        self.local: dict[str, tuple[Any, int]] = {}

    def get(self, key: str) -> StateEntry | None:
        if key in self.local:
            value, version = self.local[key]
            return StateEntry(value, version, -1)
        return self.base.get(key)

    def read(self, key: str) -> tuple[Any, int]:
        entry = self.get(key)
        if entry is None:
            raise ExecutionFailure(f"read of missing key {key!r}")
        return copy.deepcopy(entry.value), entry.version

    def write(self, key: str, value: Any) -> int:
        entry = self.get(key)
        version = (entry.version + 1) if entry else 1
        self.local[key] = (copy.deepcopy(value), version)
        return version

    def absorb(self, other: "ScratchState") -> None:
        """Fold a successful trial overlay (based on self) into this overlay."""
        self.local.update(other.local)


class Replica:
    """One node's chain, state, ordering buffer, and transaction log."""

    def __init__(self, coord: GridCoord | None = None, on_commit=None) -> None:
        self.coord = coord
        self.chain = Blockchain()
        self.state = StateStore()
        self.next_expected_seq = 1
        self.buffer: dict[int, dict] = {}
        self.tx_status: dict[str, dict] = {}
        self.committed_log: list[tuple[int, str]] = []
        self.seq_seen: dict[int, str] = {}
        self.on_commit = on_commit

    # -- local execution ------------------------------------------------

    def execute_local(self, tx: Transaction, scratch: ScratchState | None = None) -> Transaction:
        """Run ops against a scratch copy; fills read versions, never commits."""
        scratch = scratch or ScratchState(self.state)
        try:
            for op in tx.ops:
                if op.op_kind == "read":
                    _, version = scratch.read(op.key)
                    op.read_version = version
                else:
                    scratch.write(op.key, op.value)
        except ExecutionFailure as exc:
            tx.status = STATUS_REJECTED
            tx.reject_reason = str(exc)
            self.tx_status[tx.tx_id] = {"status": STATUS_REJECTED, "reason": str(exc)}
            return tx
        tx.status = STATUS_EXECUTED
        self.tx_status.setdefault(tx.tx_id, {"status": STATUS_EXECUTED})
        return tx

    # -- ordered commit path ---------------------------------------------

    def validate_and_commit(self, tx_dict: dict) -> str:
        """Validate one in-order transaction; returns committed|rejected."""
        seq = tx_dict["seq"]
        if seq != self.next_expected_seq:
            raise OrderingViolation(
                f"commit out of order: got seq {seq}, expected {self.next_expected_seq}"
            )
        self.next_expected_seq += 1
        mismatch = None
        for op in tx_dict["ops"]:
            if op["op"] == "read":
                current = self.state.version(op["key"])
                if current != op["read_version"]:
                    mismatch = (
                        f"version mismatch on {op['key']!r}: "
                        f"read {op['read_version']}, now {current}"
                    )
                    break
        if mismatch:
            self.tx_status[tx_dict["tx_id"]] = {
                "status": STATUS_REJECTED,
                "reason": mismatch,
                "seq": seq,
            }
            return STATUS_REJECTED
        block = self.chain.append(tx_dict)
        for op in tx_dict["ops"]:
            if op["op"] == "write":
                self.state.apply_write(op["key"], op["value"], block.height)
        self.tx_status[tx_dict["tx_id"]] = {
            "status": STATUS_COMMITTED,
            "height": block.height,
            "seq": seq,
        }
        self.committed_log.append((seq, tx_dict["tx_id"]))
        if self.on_commit is not None:
            self.on_commit(self.coord, tx_dict)
        return STATUS_COMMITTED

    def buffer_ordered(self, tx_dict: dict) -> None:
        """Hold an out-of-order transaction until the seq gap fills."""
        seq = tx_dict["seq"]
        known = self.seq_seen.get(seq)
        if known is not None and known != tx_dict["tx_id"]:
            raise OrderingViolation(
                f"seq {seq} carries {tx_dict['tx_id']} but was {known}"
            )
        if seq < self.next_expected_seq:
            return  # already applied; idempotent drop
        self.buffer[seq] = tx_dict

    def receive_ordered(self, tx_dict: dict) -> None:
        """Entry point for ordered transactions from the broadcast stream."""
        seq = tx_dict["seq"]
        if seq is None:
            raise OrderingViolation(f"transaction {tx_dict['tx_id']} has no seq")
        known = self.seq_seen.get(seq)
        if known is not None:
            if known != tx_dict["tx_id"]:
                raise OrderingViolation(
                    f"seq {seq} carries {tx_dict['tx_id']} but was {known}"
                )
            if seq < self.next_expected_seq:
                return  # duplicate of an applied transaction
        self.seq_seen[seq] = tx_dict["tx_id"]
        if seq > self.next_expected_seq:
            self.buffer_ordered(tx_dict)
            return
        if seq < self.next_expected_seq:
            return
        self.validate_and_commit(tx_dict)
        while self.next_expected_seq in self.buffer:
            self.validate_and_commit(self.buffer.pop(self.next_expected_seq))

    # -- queries and snapshots --------------------------------------------

    def query_status(self, tx_id: str) -> dict:
        info = self.tx_status.get(tx_id)
        if info is None:
            return {"status": STATUS_UNKNOWN}
        return dict(info)

    def state_digest(self) -> str:
        return self.state.digest()

    def snapshot(self) -> dict:
        return {
            "schema": "replica-snapshot/1",
            "coord": self.coord.as_list() if self.coord else None,
            "head_hash": self.chain.head_hash,
            "next_expected_seq": self.next_expected_seq,
            "blocks": self.chain.as_dicts(),
            "state": self.state.snapshot(),
            "digest": self.state_digest(),
        }

    def apply_sync(self, payload: dict) -> int:
        """Adopt a west-neighbor sync payload; returns blocks transferred.

        Synced blocks are history replication, not new commits: they do not
        touch the local commit log or counters.
        """
        added = self.chain.extend(payload["blocks"])
        self.state.load_snapshot(payload["state"])
        self.next_expected_seq = payload["next_expected_seq"]
        self.buffer.clear()
        return added


def quorum_read(
    key: str,
    window: ServiceAreaWindow,
    replicas: dict[GridCoord, Replica],
    r: int,
) -> tuple[Any, int] | None:
    """Read from r distinct members; return the highest-version value.

    With full commit replication (w = window size), any r >= 1 suffices at
    quiescence; mid-propagation the caller needs w + r > n.  Returns None
    when no consulted member knows the key.
    """
    members = sorted(window.members)
    if not 1 <= r <= len(members):
        raise ValueError(f"r={r} outside [1,{len(members)}]")
    best: tuple[Any, int] | None = None
    for coord in members[:r]:
        entry = replicas[coord].state.get(key)
        if entry is None:
            continue
        if best is None or entry.version > best[1]:
            best = (copy.deepcopy(entry.value), entry.version)
        elif entry.version == best[1] and canonical_json(entry.value) != canonical_json(best[0]):
            raise ConsistencyViolation(
                f"divergent values for {key!r} at version {entry.version}"
            )
    return best
