"""Smart-contract framework: method calls become read/write transactions.

A contract method runs against a scratch state and records every read
(with the version observed) and every write into the transaction it
builds.  Fresh keys come from a deterministic per-transaction stream so
that identical seeds reproduce identical chains.
"""

from __future__ import annotations

import inspect
import random
import uuid
from dataclasses import dataclass, field
from typing import Any

from .ledger import Operation, ScratchState, Transaction


class InvocationError(ValueError):
    """Unknown contract/method or arguments that do not fit the method."""


@dataclass(frozen=True)
class ContractInvocation:
    contract: str
    op: str
    args: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"contract": self.contract, "op": self.op, "args": dict(self.args)}

    @staticmethod
    def from_dict(d: dict) -> "ContractInvocation":
        return ContractInvocation(d["contract"], d["op"], dict(d.get("args", {})))


def deterministic_key(seed: int, tx_id: str, ordinal: int) -> str:
    """UUID-shaped key derived from (run seed, transaction, write ordinal)."""
    rng = random.Random(f"{seed}:{tx_id}:{ordinal}")
    return str(uuid.UUID(int=rng.getrandbits(128), version=4))


class TransactionContext:
    """Records the reads and writes a contract method performs."""

    def __init__(self, tx: Transaction, scratch: ScratchState, seed: int) -> None:
        self._tx = tx
        self._scratch = scratch
        self._seed = seed
        self._key_ordinal = 0

    def read(self, key: str) -> tuple[Any, int]:
        value, version = self._scratch.read(key)
        self._tx.ops.append(Operation("read", key, read_version=version))
        return value, version

    def write(self, key: str, value: Any) -> None:
        self._scratch.write(key, value)
        self._tx.ops.append(Operation("write", key, value=value))

    def fresh_key(self) -> str:
        key = deterministic_key(self._seed, self._tx.tx_id, self._key_ordinal)
        self._key_ordinal += 1
        return key


class Contract:
    """Base class; subclass methods read/write through self.transaction."""

    transaction: TransactionContext

    def call(self, op: str, args: dict[str, Any], ctx: TransactionContext) -> None:
        self.transaction = ctx
        method = getattr(self, op, None)
        if method is None or op.startswith("_"):
            raise InvocationError(f"{type(self).__name__} has no method {op!r}")
        try:
            inspect.signature(method).bind(**args)
        except TypeError as exc:
            raise InvocationError(f"{type(self).__name__}.{op}: {exc}") from exc
        method(**args)


class AccountContract(Contract):
    """Bank accounts: create with a balance, transfer between accounts.

    Transfer follows the reference semantics exactly: no overdraft check,
    so balances may go negative unless strict mode is enabled.
    """

    strict = False

    def create(self, balance: int = 0) -> None:
        if balance < 0:
            raise InvocationError(f"negative initial balance {balance}")
        self.transaction.write(self.transaction.fresh_key(), {"balance": balance})

    def transfer(self, from_account: str, to_account: str, balance: int = 0) -> None:
        value, _ = self.transaction.read(from_account)
        value["balance"] = value["balance"] - balance
        if self.strict and value["balance"] < 0:
            raise InvocationError(
                f"overdraft: {from_account} would hold {value['balance']}"
            )
        self.transaction.write(from_account, value)
        value, _ = self.transaction.read(to_account)
        value["balance"] = value["balance"] + balance
        self.transaction.write(to_account, value)


class ContractRegistry:
    def __init__(self) -> None:
        self._contracts: dict[str, type[Contract]] = {}

    def register(self, name: str, contract_cls: type[Contract]) -> None:
        existing = self._contracts.get(name)
        if existing is not None and existing is not contract_cls:
            raise InvocationError(f"contract {name!r} already registered differently")
        self._contracts[name] = contract_cls

    def get(self, name: str) -> type[Contract]:
        try:
            return self._contracts[name]
        except KeyError:
            raise InvocationError(f"unknown contract {name!r}") from None


DEFAULT_REGISTRY = ContractRegistry()
DEFAULT_REGISTRY.register("AccountContract", AccountContract)


def invoke_contract(
    inv: ContractInvocation,
    scratch: ScratchState,
    tx_id: str,
    seed: int = 0,
    registry: ContractRegistry = DEFAULT_REGISTRY,
) -> Transaction:
    """Run a contract method; returns the transaction it generated.

    Reads observe scratch state (so earlier transactions in the same batch
    are visible); execution failures propagate as ExecutionFailure from the
    scratch layer and invocation mistakes as InvocationError.
    """
    contract_cls = registry.get(inv.contract)
    tx = Transaction(tx_id=tx_id, contract=inv.contract)
    ctx = TransactionContext(tx, scratch, seed)
    contract_cls().call(inv.op, inv.args, ctx)
    return tx
