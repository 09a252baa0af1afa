"""Command-line entry points: run, sweep, report, serve.

Exit codes: 0 success, 2 configuration error, 3 runtime invariant
violation (livelock guard, protocol violation, convergence failure).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .network import LivelockError, ProtocolViolation
from .scenario import ScenarioConfig, load_config, run_scenario, run_sweep
from .simulation import InvariantViolation
from .topology import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parse_k_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitledger",
        description="LEO constellation blockchain simulator and scenario runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario end to end")
    run_p.add_argument("--config", type=Path, required=True, help="scenario config JSON")
    run_p.add_argument("--seed", type=int, help="override the config seed")
    run_p.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    sweep_p = sub.add_parser("sweep", help="run the scenario over a range of SA widths")
    sweep_p.add_argument("--config", type=Path, required=True)
    sweep_p.add_argument("--k", type=str, default="5..10",
                         help="slot widths, e.g. 5..10 or 5,7,9")
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--out", type=Path, default=Path("out"))

    report_p = sub.add_parser("report", help="tables, fits and figures from run outputs")
    report_p.add_argument("--in", dest="in_dir", type=Path, required=True)
    report_p.add_argument("--out", dest="out_dir", type=Path, default=None)
    report_p.add_argument("--no-figures", action="store_true")

    serve_p = sub.add_parser("serve", help="serve the control API (and web UI if built)")
    serve_p.add_argument("--config", type=Path, default=None,
                         help="scenario config for the live session (demo default)")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--ui-dir", type=Path, default=None,
                         help="static directory with the built web UI")
    return parser


def _load(args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = _load(args)
            result = run_scenario(cfg, out_dir=args.out)
            if result.convergence_violations:
                print(f"convergence violations: {result.convergence_violations}",
                      file=sys.stderr)
                return EXIT_RUNTIME
            print(f"run complete: {result.snapshot.total_messages} messages, "
                  f"{result.snapshot.commits} commits, "
                  f"{result.snapshot.migrations} migrations -> {args.out}")
            return EXIT_OK
        if args.command == "sweep":
            cfg = _load(args)
            widths = _parse_k_range(args.k)
            results = run_sweep(cfg, widths, out_dir=args.out)
            bad = [r for r in results if r.convergence_violations]
            if bad:
                print("convergence violations in sweep", file=sys.stderr)
                return EXIT_RUNTIME
            print(f"sweep complete over widths {widths} -> {args.out}")
            return EXIT_OK
        if args.command == "report":
            from .report import report_any

            written = report_any(args.in_dir, args.out_dir, figures=not args.no_figures)
            for path in written:
                print(path)
            return EXIT_OK
        if args.command == "serve":
            from .api import serve

            cfg = load_config(args.config) if args.config else None
            serve(cfg, host=args.host, port=args.port, ui_dir=args.ui_dir)
            return EXIT_OK
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LivelockError, ProtocolViolation, InvariantViolation) as exc:
        print(f"runtime violation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
