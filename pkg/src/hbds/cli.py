"""Command-line interface: run one scenario, sweep a parameter axis, re-emit
reports from stored results, or audit a trace's reputation ledger."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import PROTOCOLS, ScenarioConfig, parse_scenario_file, profile_from_env
from .engine import run
from .experiments import (AXES, DEFAULT_NODE_VALUES, DEFAULT_SEEDS,
                          DEFAULT_SELFISH_VALUES, load_rows, sweep, write_report)
from .ledger import audit_trace


def _base_config(scenario_path: str | None) -> ScenarioConfig:
    if scenario_path:
        return parse_scenario_file(scenario_path)
    return profile_from_env()


def cmd_run(args) -> int:
    cfg = _base_config(args.scenario)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, rng_seed=args.seed)
    result = run(cfg, backend=args.backend)
    os.makedirs(args.out, exist_ok=True)
    trace_path = os.path.join(args.out, "trace.txt")
    with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.trace_text())
    metrics_path = os.path.join(args.out, "metrics.json")
    with open(metrics_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(result.metrics.as_dict(), sort_keys=True, indent=2) + "\n")
    m = result.metrics
    print(f"protocol={cfg.protocol} seed={cfg.rng_seed} "
          f"delivery={m.delivery_probability:.4f} delay_s={m.avg_delivery_delay:.1f} "
          f"overhead={m.overhead_ratio if m.overhead_ratio is not None else 'NA'} "
          f"drops={m.packets_dropped}")
    print(f"wrote {trace_path} and {metrics_path}")
    return 0


def _parse_list(raw: str, cast):
    return [cast(part) for part in raw.split(",") if part.strip()]


def cmd_sweep(args) -> int:
    cfg = _base_config(args.scenario)
    if args.values:
        values = _parse_list(args.values, float if args.axis == "selfish" else int)
    else:
        values = list(DEFAULT_SELFISH_VALUES if args.axis == "selfish" else DEFAULT_NODE_VALUES)
    protocols = _parse_list(args.protocols, str) if args.protocols else list(PROTOCOLS)
    seeds = _parse_list(args.seeds, int) if args.seeds else list(DEFAULT_SEEDS)
    rows = sweep(cfg, args.axis, values, protocols, seeds, backend=args.backend)
    written = write_report(rows, args.out)
    print(f"{len(rows)} runs -> {args.out}")
    for path in written:
        print(f"  {path}")
    return 0


def cmd_report(args) -> int:
    results_path = os.path.join(args.in_dir, "results.json")
    if not os.path.exists(results_path):
        print(f"no results.json under {args.in_dir}", file=sys.stderr)
        return 2
    rows = load_rows(results_path)
    formats = ("csv", "json") if args.format == "both" else (args.format,)
    written = write_report(rows, args.in_dir, formats=formats)
    for path in written:
        print(path)
    return 0


def cmd_audit(args) -> int:
    with open(args.trace, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    report = audit_trace(lines)
    print(report.summary())
    for reason in sorted(report.category_totals):
        print(f"  {reason}: {report.category_totals[reason]!r}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbds",
        description=("Vehicular DTN simulator with an honesty-based democratic "
                     "incentive scheme and comparison baselines. "
                     "HBDS_PROFILE=paper|desk selects the default scenario scale; "
                     "HBDS_BACKEND=numba|numpy selects the kernel backend."))
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", help="key=value scenario file")
    p_run.add_argument("--seed", type=int, help="override rng_seed")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--backend", choices=("numba", "numpy"))
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--axis", choices=AXES, required=True)
    p_sweep.add_argument("--values", help="comma-separated axis values")
    p_sweep.add_argument("--protocols", help="comma-separated protocol names")
    p_sweep.add_argument("--seeds", help="comma-separated seeds")
    p_sweep.add_argument("--scenario", help="base scenario file")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--backend", choices=("numba", "numpy"))
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="re-emit reports from sweep results")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p_report.set_defaults(func=cmd_report)

    p_audit = sub.add_parser("audit", help="reputation conservation audit of a trace")
    p_audit.add_argument("--trace", required=True)
    p_audit.set_defaults(func=cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
