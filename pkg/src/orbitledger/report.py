"""Report generation: evaluation tables, fits, and rendered figures.

Reads the files a run or sweep wrote and produces a human-readable
summary, delimited data files, and matplotlib figures next to them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .ledger import canonical_json
from .metrics import linear_fit
from .topology import ConfigError

KIND_ORDER = [
    "gossip",
    "route_execute",
    "execute_transactions",
    "order_transaction",
    "sync_blocks",
    "sync_state",
    "leader_handover",
    "client_query",
]


def _load_summary(run_dir: Path) -> dict:
    path = run_dir / "summary.json"
    if not path.exists():
        raise ConfigError(f"{run_dir} has no summary.json")
    return json.loads(path.read_text())


def _load_counts(run_dir: Path) -> list[dict]:
    path = run_dir / "metrics.csv"
    if not path.exists():
        raise ConfigError(f"{run_dir} has no metrics.csv")
    with path.open() as fh:
        return list(csv.DictReader(fh))


def _axis_counts(rows: list[dict], kind: str, axis: str, size: int) -> list[int]:
    out = [0] * size
    for row in rows:
        if row["kind"] == kind:
            out[int(row[axis])] += int(row["count"])
    return out


def report_run(run_dir: Path, out_dir: Path | None = None, figures: bool = True) -> list[Path]:
    """Proportions table and per-axis distributions for one finished run."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = _load_summary(run_dir)
    rows = _load_counts(run_dir)
    grid = summary["config"]["grid"]
    planes, slots = grid["planes"], grid["slots_per_plane"]
    written: list[Path] = []

    props = summary.get("proportions_percent", {})
    prop_path = out_dir / "proportions.csv"
    lines = ["kind,percent"]
    for kind in KIND_ORDER:
        if kind in props:
            lines.append(f"{kind},{props[kind]}")
    prop_path.write_text("\n".join(lines) + "\n")
    written.append(prop_path)

    by_plane = _axis_counts(rows, "gossip", "plane", planes)
    by_slot = _axis_counts(rows, "gossip", "slot", slots)
    plane_path = out_dir / "distribution_plane.csv"
    plane_path.write_text(
        "plane,gossip\n" + "\n".join(f"{p},{c}" for p, c in enumerate(by_plane)) + "\n"
    )
    written.append(plane_path)
    slot_path = out_dir / "distribution_slot.csv"
    slot_path.write_text(
        "slot,gossip\n" + "\n".join(f"{s},{c}" for s, c in enumerate(by_slot)) + "\n"
    )
    written.append(slot_path)

    text = [
        "orbitledger run report",
        "======================",
        f"periods: {summary['periods_elapsed']}  cycles: {summary['cycles_elapsed']}",
        f"total messages: {summary['total_messages']}",
        f"commits: {summary['commits']}  migrations: {summary['migrations']}",
        f"transactions committed: {summary.get('transactions_committed', 'n/a')}",
        "",
        "message proportions (percent of all hops):",
    ]
    for kind in KIND_ORDER:
        if kind in props:
            text.append(f"  {kind:22s} {props[kind]:3d}%")
    text.append("")
    text.append("gossip by plane: " + " ".join(str(c) for c in by_plane))
    report_path = out_dir / "report.txt"
    report_path.write_text("\n".join(text) + "\n")
    written.append(report_path)

    if figures:
        written.append(_bar_figure(
            out_dir / "gossip_by_plane.png", range(planes), by_plane,
            "orbital plane", "gossip messages received",
        ))
        written.append(_bar_figure(
            out_dir / "gossip_by_slot.png", range(slots), by_slot,
            "orbital index", "gossip messages received",
        ))
    return written


def report_sweep(sweep_dir: Path, out_dir: Path | None = None, figures: bool = True) -> list[Path]:
    """Linear-fit statistics and figure for a service-area size sweep."""
    sweep_dir = Path(sweep_dir)
    out_dir = Path(out_dir) if out_dir else sweep_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    path = sweep_dir / "sweep.csv"
    if not path.exists():
        raise ConfigError(f"{sweep_dir} has no sweep.csv")
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    sizes = [int(r["sa_nodes"]) for r in rows]
    totals = [int(r["total_messages"]) for r in rows]
    gossip = [int(r["gossip"]) for r in rows]
    commits = [int(r["commits"]) for r in rows]
    written: list[Path] = []

    fits = {}
    for name, ys in (("total_messages", totals), ("gossip", gossip), ("commits", commits)):
        slope, intercept, r2 = linear_fit(sizes, ys)
        fits[name] = {"slope": slope, "intercept": intercept, "r_squared": r2}
    fit_path = out_dir / "linear_fit.json"
    fit_path.write_text(canonical_json({"schema": "linear-fit/1", "x": "sa_nodes", "fits": fits}) + "\n")
    written.append(fit_path)

    text = [
        "orbitledger sweep report",
        "========================",
        "sa_nodes  total_messages  gossip  commits",
    ]
    for r in rows:
        text.append(
            f"{int(r['sa_nodes']):8d}  {int(r['total_messages']):14d}  "
            f"{int(r['gossip']):6d}  {int(r['commits']):7d}"
        )
    text.append("")
    for name, fit in fits.items():
        text.append(
            f"fit {name}: slope={fit['slope']:.2f} intercept={fit['intercept']:.2f} "
            f"R^2={fit['r_squared']:.6f}"
        )
    report_path = out_dir / "report.txt"
    report_path.write_text("\n".join(text) + "\n")
    written.append(report_path)

    if figures:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(sizes, totals, "o-", label="total messages")
        ax.plot(sizes, gossip, "s-", label="gossip messages")
        ax.set_xlabel("service area nodes")
        ax.set_ylabel("messages")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig_path = out_dir / "messages_vs_sa_size.png"
        fig.savefig(fig_path, dpi=110)
        plt.close(fig)
        written.append(fig_path)
    return written


def report_any(in_dir: Path, out_dir: Path | None = None, figures: bool = True) -> list[Path]:
    """Dispatch on directory contents: sweep dir, run dir, or both."""
    in_dir = Path(in_dir)
    written: list[Path] = []
    if (in_dir / "sweep.csv").exists():
        written.extend(report_sweep(in_dir, out_dir, figures))
    if (in_dir / "summary.json").exists():
        written.extend(report_run(in_dir, out_dir, figures))
    if not written:
        raise ConfigError(f"{in_dir} contains neither sweep.csv nor summary.json")
    return written


def _bar_figure(path: Path, xs, ys, xlabel: str, ylabel: str) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(list(xs), ys, color="#4878a8")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
