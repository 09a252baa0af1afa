"""Scenario runner: config loading, evaluation protocol, exports, reports.

The evaluation workload per period is two account creations followed by a
transfer between the newly created accounts.  Creations go in one batch
and the transfer follows once they committed, because the transfer reads
the accounts the creations wrote.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path

from .ledger import canonical_json
from .metrics import MetricsSnapshot, counts_csv, summary_dict
from .network import MessageKind
from .simulation import SimConfig, Simulation
from .topology import ConfigError, GridCoord


@dataclass
class WorkloadSpec:
    enabled: bool = True
    create_balances: tuple[int, ...] = (10, 0)
    transfer_amount: int = 2

    def as_dict(self) -> dict:
        return {
            "enabled": self.enabled,
            "create_balances": list(self.create_balances),
            "transfer_amount": self.transfer_amount,
        }


@dataclass
class ScenarioConfig:
    planes: int = 4
    slots_per_plane: int = 28
    plane_start: int = 0
    plane_end: int = 3
    slot_width: int = 6
    anchor_slot: int = 0
    leader_row_plane: int = 1
    cycles: int = 10
    seed: int = 1
    batch_size: int = 1
    drop_probability: float = 0.0
    migrations_enabled: bool = True
    sync_trigger: str = "external"
    submitter: dict = field(default_factory=lambda: {"mode": "opposite"})
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    keep_trace: bool = True

    def as_dict(self) -> dict:
        d = asdict(self)
        d["workload"] = self.workload.as_dict()
        d["schema"] = "scenario-config/1"
        return d

    @staticmethod
    def from_dict(raw: dict) -> "ScenarioConfig":
        errors = validate_config_dict(raw)
        if errors:
            raise ConfigError("invalid scenario config:\n  " + "\n  ".join(errors))
        grid = raw.get("grid", {})
        sa = raw.get("service_area", {})
        wl = raw.get("workload", {})
        return ScenarioConfig(
            planes=grid.get("planes", 4),
            slots_per_plane=grid.get("slots_per_plane", 28),
            plane_start=sa.get("plane_start", 0),
            plane_end=sa.get("plane_end", grid.get("planes", 4) - 1),
            slot_width=sa.get("slot_width", 6),
            anchor_slot=sa.get("anchor_slot", 0),
            leader_row_plane=raw.get("leader_row_plane", 1),
            cycles=raw.get("cycles", 10),
            seed=raw["seed"],
            batch_size=raw.get("batch_size", 1),
            drop_probability=raw.get("drop_probability", 0.0),
            migrations_enabled=raw.get("migrations_enabled", True),
            sync_trigger=raw.get("sync_trigger", "external"),
            submitter=raw.get("submitter", {"mode": "opposite"}),
            workload=WorkloadSpec(
                enabled=wl.get("enabled", True),
                create_balances=tuple(wl.get("create_balances", [10, 0])),
                transfer_amount=wl.get("transfer_amount", 2),
            ),
            keep_trace=raw.get("keep_trace", True),
        )

    def to_config_dict(self) -> dict:
        """Round-trippable external config form."""
        return {
            "schema": "scenario-config/1",
            "grid": {"planes": self.planes, "slots_per_plane": self.slots_per_plane},
            "service_area": {
                "plane_start": self.plane_start,
                "plane_end": self.plane_end,
                "slot_width": self.slot_width,
                "anchor_slot": self.anchor_slot,
            },
            "leader_row_plane": self.leader_row_plane,
            "cycles": self.cycles,
            "seed": self.seed,
            "batch_size": self.batch_size,
            "drop_probability": self.drop_probability,
            "migrations_enabled": self.migrations_enabled,
            "sync_trigger": self.sync_trigger,
            "submitter": dict(self.submitter),
            "workload": self.workload.as_dict(),
            "keep_trace": self.keep_trace,
        }

    def sim_config(self) -> SimConfig:
        return SimConfig(
            planes=self.planes,
            slots_per_plane=self.slots_per_plane,
            plane_start=self.plane_start,
            plane_end=self.plane_end,
            slot_width=self.slot_width,
            anchor_slot=self.anchor_slot,
            leader_row_plane=self.leader_row_plane,
            seed=self.seed,
            batch_size=self.batch_size,
            drop_probability=self.drop_probability,
            migrations_enabled=self.migrations_enabled,
            sync_trigger=self.sync_trigger,
            keep_trace=self.keep_trace,
        )


def validate_config_dict(raw: dict) -> list[str]:
    """Every problem with the config, reported at once."""
    errors: list[str] = []
    grid = raw.get("grid", {})
    planes = grid.get("planes", 4)
    slots = grid.get("slots_per_plane", 28)
    if not isinstance(planes, int) or planes < 1:
        errors.append(f"grid.planes must be a positive integer, got {planes!r}")
    if not isinstance(slots, int) or slots < 3:
        errors.append(f"grid.slots_per_plane must be an integer >= 3, got {slots!r}")
    sa = raw.get("service_area", {})
    plane_start = sa.get("plane_start", 0)
    plane_end = sa.get("plane_end", planes - 1 if isinstance(planes, int) else 0)
    width = sa.get("slot_width", 6)
    anchor = sa.get("anchor_slot", 0)
    if isinstance(planes, int) and not (0 <= plane_start <= plane_end < planes):
        errors.append(
            f"service_area plane range [{plane_start},{plane_end}] invalid for {planes} planes"
        )
    if isinstance(slots, int) and not (isinstance(width, int) and 1 <= width <= slots):
        errors.append(f"service_area.slot_width {width!r} outside [1,{slots}]")
    if isinstance(slots, int) and not (isinstance(anchor, int) and 0 <= anchor < slots):
        errors.append(f"service_area.anchor_slot {anchor!r} outside [0,{slots})")
    leader_row = raw.get("leader_row_plane", 1)
    if not isinstance(leader_row, int) or not (plane_start <= leader_row <= plane_end):
        errors.append(f"leader_row_plane {leader_row!r} outside the SA plane range")
    if "seed" not in raw:
        errors.append("seed is mandatory (runs must be reproducible)")
    elif not isinstance(raw["seed"], int):
        errors.append(f"seed must be an integer, got {raw['seed']!r}")
    cycles = raw.get("cycles", 10)
    if not isinstance(cycles, int) or cycles < 0:
        errors.append(f"cycles must be a non-negative integer, got {cycles!r}")
    batch = raw.get("batch_size", 1)
    if not isinstance(batch, int) or batch < 1:
        errors.append(f"batch_size must be >= 1, got {batch!r}")
    drop = raw.get("drop_probability", 0.0)
    if not isinstance(drop, (int, float)) or not 0.0 <= float(drop) <= 1.0:
        errors.append(f"drop_probability must be in [0,1], got {drop!r}")
    trigger = raw.get("sync_trigger", "external")
    if trigger not in ("external", "internal"):
        errors.append(f"sync_trigger must be external|internal, got {trigger!r}")
    submitter = raw.get("submitter", {"mode": "opposite"})
    mode = submitter.get("mode") if isinstance(submitter, dict) else None
    if mode not in ("opposite", "fixed"):
        errors.append(f"submitter.mode must be opposite|fixed, got {mode!r}")
    elif mode == "fixed":
        p, s = submitter.get("plane"), submitter.get("slot")
        if not (isinstance(p, int) and isinstance(s, int)):
            errors.append("fixed submitter needs integer plane and slot")
        elif isinstance(planes, int) and isinstance(slots, int) and not (
            0 <= p < planes and 0 <= s < slots
        ):
            errors.append(f"fixed submitter ({p},{s}) outside the grid")
    return errors


def load_config(path: Path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ScenarioConfig.from_dict(raw)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    snapshot: MetricsSnapshot
    committed_log: list[tuple[int, str]]
    chain_head: str
    state_digest: str
    convergence_violations: list[str]
    transactions_committed: int
    transactions_submitted: int
    sim: Simulation

    def sa_node_count(self) -> int:
        return (self.config.plane_end - self.config.plane_start + 1) * self.config.slot_width


def submitter_for(cfg: ScenarioConfig, sim: Simulation) -> GridCoord:
    """Workload injection point for the current period.

    Default: the node diametrically opposite the window center, on the
    leader row so ordering stays in-plane; it tracks the moving window and
    is always outside it for evaluation-scale widths.
    """
    if cfg.submitter.get("mode") == "fixed":
        return GridCoord(cfg.submitter["plane"], cfg.submitter["slot"])
    w = cfg.slots_per_plane
    center = (sim.window.west_edge_slot + (cfg.slot_width - 1) // 2) % w
    return GridCoord(cfg.leader_row_plane, (center + w // 2) % w)


class WorkloadDriver:
    """Issues the per-period create/create/transfer rounds."""

    def __init__(self, cfg: ScenarioConfig, sim: Simulation) -> None:
        self.cfg = cfg
        self.sim = sim
        self.counter = 0
        self.submitted: list[str] = []

    def next_tx_id(self) -> str:
        self.counter += 1
        return f"tx-{self.counter:06d}"

    def run_period(self) -> None:
        if not self.cfg.workload.enabled:
            return
        submitter = submitter_for(self.cfg, self.sim)
        create_ids = []
        items = []
        for balance in self.cfg.workload.create_balances:
            tx_id = self.next_tx_id()
            create_ids.append(tx_id)
            items.append({
                "tx_id": tx_id,
                "invocation": {
                    "contract": "AccountContract",
                    "op": "create",
                    "args": {"balance": balance},
                },
            })
        self.submitted.extend(create_ids)
        self.sim.submit(submitter, items)
        if len(create_ids) < 2:
            return
        accounts = []
        for tx_id in create_ids[:2]:
            tx = self.sim.committed_tx(tx_id)
            if tx is None:
                return  # creations did not commit; skip the transfer
            accounts.append(tx["ops"][0]["key"])
        transfer_id = self.next_tx_id()
        self.submitted.append(transfer_id)
        self.sim.submit(submitter, [{
            "tx_id": transfer_id,
            "invocation": {
                "contract": "AccountContract",
                "op": "transfer",
                "args": {
                    "from_account": accounts[0],
                    "to_account": accounts[1],
                    "balance": self.cfg.workload.transfer_amount,
                },
            },
        }])


def run_scenario(cfg: ScenarioConfig, out_dir: Path | None = None) -> ScenarioResult:
    sim = Simulation(cfg.sim_config())
    driver = WorkloadDriver(cfg, sim)
    total_periods = cfg.cycles * cfg.slots_per_plane
    for _ in range(total_periods):
        sim.advance_period()
        driver.run_period()
        sim.check_convergence()
    sim.verify_all_chains()

    ref = sim.nodes[min(sim.window.members)].replica
    snapshot = sim.metrics.snapshot()
    result = ScenarioResult(
        config=cfg,
        snapshot=snapshot,
        committed_log=sim.global_committed_log(),
        chain_head=ref.chain.head_hash,
        state_digest=ref.state_digest(),
        convergence_violations=list(sim.convergence_violations),
        transactions_committed=len(sim.global_commits),
        transactions_submitted=len(driver.submitted),
        sim=sim,
    )
    if out_dir is not None:
        write_run_outputs(result, Path(out_dir))
    return result


def write_run_outputs(result: ScenarioResult, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    metrics_path = out_dir / "metrics.csv"
    metrics_path.write_text(counts_csv(result.snapshot))
    written.append(metrics_path)

    summary = summary_dict(result.snapshot, seed=result.config.seed)
    summary["config"] = result.config.to_config_dict()
    summary["transactions_submitted"] = result.transactions_submitted
    summary["transactions_committed"] = result.transactions_committed
    summary["chain_head"] = result.chain_head
    summary["state_digest"] = result.state_digest
    summary["convergence_violations"] = result.convergence_violations
    summary_path = out_dir / "summary.json"
    summary_path.write_text(canonical_json(summary) + "\n")
    written.append(summary_path)

    trace_path = out_dir / "trace.jsonl"
    with trace_path.open("w") as fh:
        for line in result.sim.network.trace_lines():
            fh.write(canonical_json(line) + "\n")
    written.append(trace_path)

    chain_path = out_dir / "chain.json"
    ref = result.sim.nodes[min(result.sim.window.members)].replica
    chain_path.write_text(canonical_json(ref.snapshot()) + "\n")
    written.append(chain_path)
    return written


def run_sweep(cfg: ScenarioConfig, widths: list[int], out_dir: Path | None = None) -> list[ScenarioResult]:
    """Run one scenario per service-area width; writes sweep.csv if out_dir."""
    results = []
    for k in widths:
        sub = replace(cfg, slot_width=k, keep_trace=False)
        sub_out = Path(out_dir) / f"k{k}" if out_dir else None
        results.append(run_scenario(sub, sub_out))
    if out_dir is not None:
        write_sweep_csv(results, Path(out_dir))
    return results


def write_sweep_csv(results: list[ScenarioResult], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    kinds = [k.value for k in MessageKind]
    lines = ["slot_width,sa_nodes,total_messages," + ",".join(kinds)
             + ",commits,migrations,transactions_committed"]
    for res in results:
        totals = {k.value: v for k, v in res.snapshot.totals.items()}
        row = [
            str(res.config.slot_width),
            str(res.sa_node_count()),
            str(res.snapshot.total_messages),
            *(str(totals.get(k, 0)) for k in kinds),
            str(res.snapshot.commits),
            str(res.snapshot.migrations),
            str(res.transactions_committed),
        ]
        lines.append(",".join(row))
    path = out_dir / "sweep.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
