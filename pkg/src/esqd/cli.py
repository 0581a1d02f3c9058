"""Command-line entry point: run experiments, correct archives, sweep one
parameter axis and list the registered tasks and algorithms."""
from __future__ import annotations

import argparse
import sys

import yaml

from .harness import (
    ALGORITHMS,
    ConfigError,
    RunConfig,
    correct_archive_file,
    run_experiment,
    sweep,
)
from .tasks import TASKS


def _parse_value(text: str):
    return yaml.safe_load(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esqd",
        description="Quality-diversity experiments with parallel ES emitters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config", help="path to the YAML/JSON run config")
    p_run.add_argument("--workers", type=int, default=None)

    p_correct = sub.add_parser(
        "correct", help="recompute an archive from mean re-evaluations"
    )
    p_correct.add_argument("archive", help="path to an archive snapshot (JSON)")
    p_correct.add_argument("--task", required=True)
    p_correct.add_argument("--m", type=int, default=512)
    p_correct.add_argument("--seed", type=int, default=0)
    p_correct.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="one run per value of a config field")
    p_sweep.add_argument("template", help="path to the template run config")
    p_sweep.add_argument(
        "--axis",
        required=True,
        help="dotted field and values, e.g. algo_params.stagnation_budget=10,50",
    )
    p_sweep.add_argument("--out", default=None)

    sub.add_parser("list-tasks", help="print registered task names")
    sub.add_parser("list-algos", help="print registered algorithm names")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = RunConfig.from_file(args.config)
            if args.workers is not None:
                config.workers = args.workers
            run_dir = run_experiment(config)
            print(run_dir)
        elif args.command == "correct":
            out = correct_archive_file(
                args.archive, args.task, m=args.m, seed=args.seed, out_dir=args.out
            )
            print(out)
        elif args.command == "sweep":
            field, _, raw = args.axis.partition("=")
            if not raw:
                raise ConfigError("--axis must look like field=value1,value2,...")
            values = [_parse_value(v) for v in raw.split(",")]
            template = RunConfig.from_file(args.template)
            out_csv = sweep(template, field, values, args.out)
            print(out_csv)
        elif args.command == "list-tasks":
            for name in sorted(TASKS):
                print(name)
        elif args.command == "list-algos":
            for name in sorted(ALGORITHMS):
                print(name)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
