import pytest

from orbitledger.contracts import (
    AccountContract,
    ContractInvocation,
    ContractRegistry,
    InvocationError,
    deterministic_key,
    invoke_contract,
)
from orbitledger.ledger import ExecutionFailure, Replica, ScratchState
from orbitledger.topology import GridCoord

from conftest import make_cluster


def fresh_scratch(writes: dict | None = None):
    replica = Replica(GridCoord(0, 0))
    if writes:
        for i, (key, value) in enumerate(sorted(writes.items())):
            replica.receive_ordered({
                "tx_id": f"seed-{i}", "contract": None, "submitter": None,
                "seq": replica.next_expected_seq,
                "ops": [{"op": "write", "key": key, "value": value}],
            })
    return replica, ScratchState(replica.state)


def test_create_emits_single_write_with_fresh_key():
    _, scratch = fresh_scratch()
    tx = invoke_contract(
        ContractInvocation("AccountContract", "create", {"balance": 0}),
        scratch, "tx-1", seed=5)
    assert len(tx.ops) == 1
    op = tx.ops[0]
    assert op.op_kind == "write" and op.value == {"balance": 0}
    assert op.key == deterministic_key(5, "tx-1", 0)


def test_create_with_balance():
    _, scratch = fresh_scratch()
    tx = invoke_contract(
        ContractInvocation("AccountContract", "create", {"balance": 100}),
        scratch, "tx-1")
    assert tx.ops[0].value == {"balance": 100}


def test_creates_in_same_run_get_distinct_keys():
    _, scratch = fresh_scratch()
    tx1 = invoke_contract(ContractInvocation("AccountContract", "create", {}), scratch, "tx-1")
    tx2 = invoke_contract(ContractInvocation("AccountContract", "create", {}), scratch, "tx-2")
    assert tx1.ops[0].key != tx2.ops[0].key


def test_negative_create_is_an_invocation_error():
    _, scratch = fresh_scratch()
    with pytest.raises(InvocationError):
        invoke_contract(
            ContractInvocation("AccountContract", "create", {"balance": -1}),
            scratch, "tx-1")


def test_transfer_op_order_and_values():
    _, scratch = fresh_scratch({"a": {"balance": 10}, "b": {"balance": 0}})
    tx = invoke_contract(
        ContractInvocation("AccountContract", "transfer",
                           {"from_account": "a", "to_account": "b", "balance": 2}),
        scratch, "tx-1")
    kinds = [(op.op_kind, op.key) for op in tx.ops]
    assert kinds == [("read", "a"), ("write", "a"), ("read", "b"), ("write", "b")]
    assert tx.ops[1].value == {"balance": 8}
    assert tx.ops[3].value == {"balance": 2}
    assert tx.ops[0].read_version == 1


def test_self_transfer_nets_to_zero():
    _, scratch = fresh_scratch({"a": {"balance": 7}})
    tx = invoke_contract(
        ContractInvocation("AccountContract", "transfer",
                           {"from_account": "a", "to_account": "a", "balance": 5}),
        scratch, "tx-1")
    # the second read sees the decremented scratch value, so the add restores it
    assert tx.ops[3].value == {"balance": 7}
    assert scratch.read("a")[0] == {"balance": 7}


def test_overdraft_is_allowed_by_default():
    _, scratch = fresh_scratch({"a": {"balance": 0}, "b": {"balance": 0}})
    tx = invoke_contract(
        ContractInvocation("AccountContract", "transfer",
                           {"from_account": "a", "to_account": "b", "balance": 5}),
        scratch, "tx-1")
    assert tx.ops[1].value == {"balance": -5}
    assert tx.ops[3].value == {"balance": 5}


def test_strict_mode_rejects_overdraft():
    class StrictAccounts(AccountContract):
        strict = True

    registry = ContractRegistry()
    registry.register("Accounts", StrictAccounts)
    _, scratch = fresh_scratch({"a": {"balance": 0}, "b": {"balance": 0}})
    with pytest.raises(InvocationError):
        invoke_contract(
            ContractInvocation("Accounts", "transfer",
                               {"from_account": "a", "to_account": "b", "balance": 5}),
            scratch, "tx-1", registry=registry)


def test_transfer_from_missing_account_fails_execution():
    _, scratch = fresh_scratch()
    with pytest.raises(ExecutionFailure):
        invoke_contract(
            ContractInvocation("AccountContract", "transfer",
                               {"from_account": "ghost", "to_account": "ghost2"}),
            scratch, "tx-1")


def test_unknown_contract_and_method_and_args():
    _, scratch = fresh_scratch()
    with pytest.raises(InvocationError):
        invoke_contract(ContractInvocation("Nope", "create", {}), scratch, "tx-1")
    with pytest.raises(InvocationError):
        invoke_contract(ContractInvocation("AccountContract", "mint", {}), scratch, "tx-1")
    with pytest.raises(InvocationError):
        invoke_contract(
            ContractInvocation("AccountContract", "create", {"bogus": 1}), scratch, "tx-1")


def test_registry_registration_idempotent_per_implementation():
    registry = ContractRegistry()
    registry.register("Accounts", AccountContract)
    registry.register("Accounts", AccountContract)  # same impl: fine

    class Other(AccountContract):
        pass

    with pytest.raises(InvocationError):
        registry.register("Accounts", Other)


def test_identical_invocations_yield_identical_ops():
    def run():
        _, scratch = fresh_scratch({"a": {"balance": 3}, "b": {"balance": 4}})
        tx = invoke_contract(
            ContractInvocation("AccountContract", "transfer",
                               {"from_account": "a", "to_account": "b", "balance": 1}),
            scratch, "tx-9", seed=123)
        return [op.as_dict() for op in tx.ops]

    assert run() == run()


def test_read_set_sufficiency():
    # rerunning the method against only the recorded reads reproduces the writes
    _, scratch = fresh_scratch({"a": {"balance": 10}, "b": {"balance": 5}, "noise": {"x": 1}})
    inv = ContractInvocation("AccountContract", "transfer",
                             {"from_account": "a", "to_account": "b", "balance": 4})
    tx = invoke_contract(inv, scratch, "tx-1", seed=1)
    read_keys = {op.key for op in tx.ops if op.op_kind == "read"}
    _, restricted = fresh_scratch(
        {"a": {"balance": 10}, "b": {"balance": 5}})
    assert read_keys == {"a", "b"}
    replay = invoke_contract(inv, restricted, "tx-1", seed=1)
    assert [op.as_dict() for op in replay.ops if op.op_kind == "write"] == \
        [op.as_dict() for op in tx.ops if op.op_kind == "write"]


def test_conflicting_transfers_one_commits_one_rejects():
    # two executors read the same account version; ordering decides the winner
    leader = GridCoord(1, 5)
    cluster = make_cluster(slot_width=6, leader=leader)
    seed_items = [
        {"tx_id": "seed-a", "invocation": {
            "contract": "AccountContract", "op": "create", "args": {"balance": 10}}},
        {"tx_id": "seed-b", "invocation": {
            "contract": "AccountContract", "op": "create", "args": {"balance": 0}}},
        {"tx_id": "seed-c", "invocation": {
            "contract": "AccountContract", "op": "create", "args": {"balance": 0}}},
    ]
    cluster.node(1, 5).submit_execute(seed_items)
    cluster.network.run_until_quiescent()
    ref = cluster.node(0, 0).replica
    key_of = {s["tx_id"]: cluster.node(0, 0).replica.chain.blocks[
        ref.tx_status[s["tx_id"]]["height"]].tx["ops"][0]["key"] for s in seed_items}

    def transfer(tx_id, to_key):
        return {"tx_id": tx_id, "invocation": {
            "contract": "AccountContract", "op": "transfer",
            "args": {"from_account": key_of["seed-a"], "to_account": to_key, "balance": 7}}}

    # both executed before either is ordered: same read version at two nodes
    cluster.node(0, 0).submit_execute([transfer("t-1", key_of["seed-b"])])
    cluster.node(3, 2).submit_execute([transfer("t-2", key_of["seed-c"])])
    cluster.network.run_until_quiescent()
    statuses = {tx: ref.query_status(tx)["status"] for tx in ("t-1", "t-2")}
    assert sorted(statuses.values()) == ["committed", "rejected"]
    balances = sorted(ref.state.get(key_of[s]).value["balance"] for s in key_of)
    assert balances == [0, 3, 7]


def test_conservation_under_committed_transfers():
    leader = GridCoord(1, 5)
    cluster = make_cluster(slot_width=6, leader=leader)
    items = [
        {"tx_id": f"c-{i}", "invocation": {
            "contract": "AccountContract", "op": "create", "args": {"balance": b}}}
        for i, b in enumerate([10, 20, 30])
    ]
    cluster.node(1, 5).submit_execute(items)
    cluster.network.run_until_quiescent()
    ref = cluster.node(0, 0).replica
    keys = [ref.chain.blocks[ref.tx_status[f"c-{i}"]["height"]].tx["ops"][0]["key"]
            for i in range(3)]
    moves = [(0, 1, 5), (1, 2, 15), (2, 0, 25), (0, 2, 9)]
    for i, (a, b, amt) in enumerate(moves):
        cluster.node(2, 20).submit_execute([{
            "tx_id": f"t-{i}", "invocation": {
                "contract": "AccountContract", "op": "transfer",
                "args": {"from_account": keys[a], "to_account": keys[b], "balance": amt}}}])
        cluster.network.run_until_quiescent()
    total = sum(ref.state.get(k).value["balance"] for k in keys)
    assert total == 60
