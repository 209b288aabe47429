"""Command-line entry point: symdel validate|evolve|mix|score|delegate|report.

Every command accepts --config PATH (a JSON run config); command-line flags
override config values.  Exit codes: 0 ok, 2 data fault, 3 config fault,
4 executor fault.  If SYMDEL_TOOLCHAIN_ROOT is set, relative executor
commands are resolved against it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, DataError, ExecutorError
from .harness import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_EXECUTOR,
    EXIT_OK,
    RunConfig,
    cmd_delegate,
    cmd_evolve,
    cmd_mix,
    cmd_score,
    cmd_validate,
)
from .report import parse_report, render_report

TOOLCHAIN_ENV = "SYMDEL_TOOLCHAIN_ROOT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symdel", description=__doc__)
    parser.add_argument("--config", help="JSON run-config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a manifest and its sample files")
    p.add_argument("--manifest")

    p = sub.add_parser("evolve", help="apply symbol-evol to one task split")
    p.add_argument("--manifest")
    p.add_argument("--task", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--seed", type=int)
    p.add_argument("--length", type=int, default=6)
    p.add_argument("--out")

    p = sub.add_parser("mix", help="build the injection or infusion record set")
    p.add_argument("--stage", required=True, choices=["injection", "infusion"])
    p.add_argument("--manifest")
    p.add_argument("--ratio", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--general")
    p.add_argument("--out")

    p = sub.add_parser("score", help="score predictions (or aggregate a values file)")
    p.add_argument("--manifest")
    p.add_argument("--predictions")
    p.add_argument("--values", help="aggregation-only: task/domain/metric/value TSV")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", default="plain_table", choices=["plain_table", "delimited"])

    p = sub.add_parser("delegate", help="run generated symbolic forms through solvers")
    p.add_argument("--manifest")
    p.add_argument("--predictions")
    p.add_argument("--out")
    p.add_argument("--format", default="plain_table", choices=["plain_table", "delimited"])

    p = sub.add_parser("report", help="re-render a delimited report file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", default="plain_table", choices=["plain_table", "delimited"])
    return parser


def _apply_toolchain_root(config: RunConfig) -> RunConfig:
    root = os.environ.get(TOOLCHAIN_ENV)
    if not root or not config.executors:
        return config
    executors = {}
    for name, spec in config.executors.items():
        if spec.command and not os.path.isabs(spec.command[0]):
            command = (str(Path(root) / spec.command[0]), *spec.command[1:])
            spec = replace(spec, command=command)
        executors[name] = spec
    return replace(config, executors=executors)


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides: dict[str, object] = {}
    for key in ("manifest", "predictions", "values", "general"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "ratio", None) is not None:
        overrides["ratio"] = args.ratio
    if overrides:
        config = replace(config, **overrides)  # type: ignore[arg-type]
    return _apply_toolchain_root(config)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.command == "validate":
            result = cmd_validate(config)
            for violation in result["violations"]:  # type: ignore[union-attr]
                print(violation, file=sys.stderr)
            print(
                f"checked {result['samples']} samples across {result['tasks']} tasks: "
                + ("ok" if result["ok"] else f"{len(result['violations'])} violation(s)")  # type: ignore[arg-type]
            )
            return EXIT_OK if result["ok"] else EXIT_DATA
        if args.command == "evolve":
            summary = cmd_evolve(config, task=args.task, split=args.split, length=args.length)
            print(json.dumps(summary, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "mix":
            summary = cmd_mix(config, stage=args.stage)
            print(json.dumps(summary, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "score":
            report = cmd_score(config)
            print(render_report(report, args.format), end="")
            return EXIT_OK
        if args.command == "delegate":
            report = cmd_delegate(config)
            print(render_report(report, args.format), end="")
            return EXIT_OK
        if args.command == "report":
            text = Path(args.infile).read_text(encoding="utf-8")
            print(render_report(parse_report(text), args.format), end="")
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except DataError as exc:
        print(f"data fault: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"config fault: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExecutorError as exc:
        print(f"executor fault: {exc}", file=sys.stderr)
        return EXIT_EXECUTOR


if __name__ == "__main__":
    raise SystemExit(main())
