"""Command line: ``tsaw run``, ``tsaw list``, ``tsaw verify``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import battery
from .errors import ConfigError
from .experiments import DESCRIPTIONS, EXPERIMENTS, ExperimentConfig, format_check, run_experiment


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsaw", description="True self-avoiding walk experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one named experiment")
    r.add_argument("experiment")
    r.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    r.add_argument("--seed", type=_seed, default=None)
    r.add_argument("--out", type=Path, default=Path("."))
    sub.add_parser("list", help="list experiments")
    v = sub.add_parser("verify", help="run the acceptance battery")
    v.add_argument("--quick", action="store_true", help="skip the local-limit experiments")
    v.add_argument("--seed", type=_seed, default=battery.DEFAULT_SEED)
    v.add_argument("--out", type=Path, default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in EXPERIMENTS:
            print(f"{name:18s} {DESCRIPTIONS[name]}")
        return 0
    if args.command == "verify":
        results = battery.run(seed=args.seed, quick=args.quick, out=args.out)
        failed = [item.label for item, _, ok in results if not ok]
        print(f"{len(results) - len(failed)}/{len(results)} passed")
        return 1 if failed else 0
    cfg = {}
    if args.config is not None:
        cfg = json.loads(args.config.read_text())
    cfg["name"] = args.experiment
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg["out"] = str(args.out)
    try:
        config = ExperimentConfig.from_dict(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run_experiment(config)
    for c in report.checks:
        print(format_check(report, c))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
