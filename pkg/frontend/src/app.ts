// Page wiring: render loop, control panel, transaction form, watchlist.
// All state shown here is re-derived from the API; reloading reproduces it.

import { ApiClient, ApiError } from "./api.js";
import { ROLE_COLORS, ROLE_LABELS } from "./colors.js";
import {
  buildGridViewModel,
  formatBalance,
  GridViewModel,
} from "./viewmodel.js";

const api = new ApiClient("");
const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

let autoMode = false;
const watchlist = new Set<string>();

async function refreshGrid(): Promise<GridViewModel> {
  const vm = buildGridViewModel(await api.getGrid());
  $("period").textContent = String(vm.period);
  $("seed").textContent = String(vm.seed);
  const gridEl = $("grid");
  gridEl.style.gridTemplateColumns = `repeat(${vm.slots}, 1fr)`;
  gridEl.replaceChildren(
    ...vm.cells.map((cell) => {
      const el = document.createElement("div");
      el.className = "cell" + (cell.isLeader ? " leader" : "");
      el.style.background = cell.color;
      el.title = cell.title;
      el.onclick = () => {
        $("node-details").textContent =
          `node (${cell.plane},${cell.slot}): ${ROLE_LABELS[cell.role]}, ` +
          `chain height ${cell.chainHeight}`;
      };
      return el;
    }),
  );
  return vm;
}

async function refreshMetrics(): Promise<void> {
  const m = await api.getMetrics();
  const rows = Object.entries(m.totals)
    .sort()
    .map(([kind, count]) => {
      const pct = m.proportions_percent[kind];
      return `<tr><td>${kind}</td><td>${count}</td><td>${pct ?? 0}%</td></tr>`;
    })
    .join("");
  $("metrics-body").innerHTML =
    rows +
    `<tr class="total"><td>total</td><td>${m.total_messages}</td><td></td></tr>`;
  $("commits").textContent = String(m.commits);
  $("migrations").textContent = String(m.migrations);
}

async function refreshBalances(): Promise<void> {
  const listEl = $("watchlist");
  const entries = await Promise.all(
    [...watchlist].map(async (key) => {
      try {
        const state = await api.readState(key, readQuorum());
        return { key, text: `${formatBalance(state.value)} (v${state.version})` };
      } catch {
        return { key, text: "unknown" };
      }
    }),
  );
  listEl.replaceChildren(
    ...entries.map(({ key, text }) => {
      const li = document.createElement("li");
      li.innerHTML = `<code>${key.slice(0, 8)}…</code> balance ${text}`;
      return li;
    }),
  );
  const options = [...watchlist].map((key) => {
    const opt = document.createElement("option");
    opt.value = key;
    opt.textContent = key.slice(0, 13) + "…";
    return opt;
  });
  $("from-account").replaceChildren(...options.map((o) => o.cloneNode(true)));
  $("to-account").replaceChildren(...options);
}

function readQuorum(): number {
  const r = parseInt(($("quorum") as HTMLInputElement).value, 10);
  return Number.isFinite(r) && r >= 1 ? r : 1;
}

async function refreshAll(): Promise<void> {
  await refreshGrid();
  await Promise.all([refreshMetrics(), refreshBalances()]);
}

function trackStatus(line: string): void {
  const li = document.createElement("li");
  li.textContent = line;
  $("tx-log").prepend(li);
}

async function submitCreate(): Promise<void> {
  const balance = parseInt(($("create-balance") as HTMLInputElement).value, 10) || 0;
  try {
    const tx = await api.submitTransaction("AccountContract", "create", { balance });
    const info = await api.getTransaction(tx.tx_id);
    (info.keys_written ?? []).forEach((k) => watchlist.add(k));
    trackStatus(`${tx.tx_id} create(${balance}) -> ${info.status}`);
  } catch (err) {
    trackStatus(`create failed: ${describe(err)}`);
  }
  await refreshAll();
}

async function submitTransfer(): Promise<void> {
  const from = ($("from-account") as HTMLSelectElement).value;
  const to = ($("to-account") as HTMLSelectElement).value;
  const balance = parseInt(($("transfer-amount") as HTMLInputElement).value, 10) || 0;
  if (!from || !to) {
    trackStatus("transfer needs two accounts in the watchlist");
    return;
  }
  try {
    const tx = await api.submitTransaction("AccountContract", "transfer", {
      from_account: from,
      to_account: to,
      balance,
    });
    trackStatus(`${tx.tx_id} transfer(${balance}) -> ${tx.status}`);
  } catch (err) {
    trackStatus(`transfer rejected: ${describe(err)}`);
  }
  await refreshAll();
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    const body = err.body as { reason?: string; detail?: unknown } | null;
    return body?.reason ?? JSON.stringify(body?.detail ?? err.status);
  }
  return String(err);
}

async function toggleAuto(): Promise<void> {
  const interval = parseFloat(($("interval") as HTMLInputElement).value) || 10;
  autoMode = !autoMode;
  await api.setMode(autoMode ? "auto" : "paused", interval);
  $("auto-toggle").textContent = autoMode ? "pause" : "auto-advance";
  ($("step-button") as HTMLButtonElement).disabled = autoMode;
}

function renderLegend(): void {
  $("legend").replaceChildren(
    ...(Object.keys(ROLE_COLORS) as (keyof typeof ROLE_COLORS)[]).map((role) => {
      const item = document.createElement("span");
      item.className = "legend-item";
      item.innerHTML =
        `<span class="swatch" style="background:${ROLE_COLORS[role]}"></span>` +
        ROLE_LABELS[role];
      return item;
    }),
  );
}

function connectEvents(): void {
  api.subscribe(
    async (event) => {
      if (event === "period" || event === "tx_committed") await refreshAll();
    },
    (connected) => {
      $("offline-banner").style.display = connected ? "none" : "block";
    },
  );
}

export async function main(): Promise<void> {
  renderLegend();
  $("step-button").onclick = async () => {
    try {
      await api.step();
    } catch (err) {
      trackStatus(`step refused: ${describe(err)}`);
    }
    await refreshAll();
  };
  $("auto-toggle").onclick = () => void toggleAuto();
  $("create-button").onclick = () => void submitCreate();
  $("transfer-button").onclick = () => void submitTransfer();
  $("overlay-toggle").onclick = () => {
    $("earth-overlay").classList.toggle("visible");
  };
  connectEvents();
  await refreshAll();
}

if (typeof document !== "undefined") {
  void main();
}
