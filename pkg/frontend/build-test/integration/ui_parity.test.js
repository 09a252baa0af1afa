// UI parity against a live control-api session: role coloring, band
// movement per step, and the create/create/transfer flow, all through the
// same client and view-model code the page runs.
import assert from "node:assert/strict";
import { after, before, test } from "node:test";
import { spawn } from "node:child_process";
import { ApiClient } from "../src/api.js";
import { bandIsContiguous, bandShiftedEast, buildGridViewModel, leaderPlacementOk, } from "../src/viewmodel.js";
const PORT = 8779;
const BASE = `http://127.0.0.1:${PORT}`;
let server;
const api = new ApiClient(BASE);
before(async () => {
    server = spawn("python3", ["-m", "orbitledger.cli", "serve", "--port", String(PORT)], {
        stdio: "ignore",
    });
    const deadline = Date.now() + 30_000;
    for (;;) {
        try {
            await api.getGrid();
            return;
        }
        catch {
            if (Date.now() > deadline)
                throw new Error("control api did not come up");
            await new Promise((r) => setTimeout(r, 200));
        }
    }
});
after(() => {
    server.kill();
});
test("grid shows one pink leader on the green row and a contiguous yellow band", async () => {
    const grid = await api.getGrid();
    const vm = buildGridViewModel(grid);
    assert.equal(vm.cells.length, 112);
    assert.equal(vm.roleCounts.leader, 1);
    assert.equal(vm.roleCounts.sa + vm.roleCounts.leader_row + vm.roleCounts.leader, grid.sa_size);
    assert.ok(bandIsContiguous(vm.saColumns, vm.slots));
    assert.ok(leaderPlacementOk(vm, grid.leader_row_plane));
});
test("the band shifts one column east per step", async () => {
    const before_ = buildGridViewModel(await api.getGrid());
    await api.step();
    const after_ = buildGridViewModel(await api.getGrid());
    assert.equal(after_.period, before_.period + 1);
    assert.ok(bandShiftedEast(before_.saColumns, after_.saColumns, before_.slots));
    assert.ok(leaderPlacementOk(after_, (await api.getGrid()).leader_row_plane));
});
test("create/create/transfer reaches committed and updates balances", async () => {
    const keys = [];
    for (const balance of [10, 0]) {
        const tx = await api.submitTransaction("AccountContract", "create", { balance });
        assert.equal(tx.status, "committed");
        const info = await api.getTransaction(tx.tx_id);
        assert.equal(info.status, "committed");
        keys.push(...(info.keys_written ?? []));
    }
    assert.equal(keys.length, 2);
    const transfer = await api.submitTransaction("AccountContract", "transfer", {
        from_account: keys[0],
        to_account: keys[1],
        balance: 2,
    });
    assert.equal(transfer.status, "committed");
    const balances = await Promise.all(keys.map((k) => api.readState(k)));
    assert.deepEqual(balances.map((b) => b.value.balance), [8, 2]);
    // a total read agrees: every replica already converged
    const total = await api.readState(keys[0], 24);
    assert.equal(total.value.balance, 8);
});
test("rejected transfers surface their reason", async () => {
    await assert.rejects(api.submitTransaction("AccountContract", "transfer", {
        from_account: "not-a-key",
        to_account: "also-not",
        balance: 1,
    }), (err) => err.status === 422 && String(err.body.reason).includes("not-a-key"));
});
