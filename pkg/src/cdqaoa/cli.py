"""``cdqaoa generate|oracle|sweep|report`` command-line entry point.

Failures exit nonzero with a single JSON object on stderr:
``{"error": <kind>, "message": <text>, "command": <subcommand>}``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import bench
from .portfolio import load_instance


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _spec(args) -> bench.SweepSpec:
    data = bench.load_config(args.config) if args.config else {}
    spec = bench.SweepSpec.from_mapping(data)
    if getattr(args, "instances", None):
        spec = replace(spec, instances=[str(p) for p in args.instances])
    if args.seed is not None:
        spec = replace(spec, base_seed=args.seed)
    if getattr(args, "count", None) is not None:
        spec = replace(spec, count=args.count)
    return spec


def _generate(args) -> dict:
    spec = _spec(args)
    paths = bench.cmd_generate(spec, args.out or "instances")
    return {"written": [str(p) for p in paths]}


def _oracle(args) -> dict:
    reports = [bench.cmd_oracle(load_instance(p)) for p in args.instances]
    text = json.dumps(reports if len(reports) != 1 else reports[0], indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        return {"written": [args.out]}
    sys.stdout.write(text)
    return {}


def _sweep(args) -> dict:
    spec = _spec(args)
    results, summary = bench.cmd_sweep(spec, args.out or "sweep_out", args.jobs)
    return {"written": [str(results), str(summary)]}


def _report(args) -> dict:
    paths = bench.cmd_report(args.results, args.out or "report_out")
    return {"written": [str(p) for p in paths]}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cdqaoa", description="Constrained and counterdiabatic QAOA benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, jobs=False):
        p.add_argument("--config", help="JSON or key = value config file")
        p.add_argument("--seed", type=int, help="base seed (overrides config)")
        p.add_argument("--out", help="output path")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes")

    g = sub.add_parser("generate", help="write seeded instance files")
    common(g)
    g.add_argument("--count", type=int)
    g.set_defaults(func=_generate)

    o = sub.add_parser("oracle", help="exact feasible extrema and penalty gap")
    common(o)
    o.add_argument("instances", nargs="+", type=Path)
    o.set_defaults(func=_oracle)

    s = sub.add_parser("sweep", help="run the method/depth/CVaR grid")
    common(s, jobs=True)
    s.add_argument("--count", type=int)
    s.add_argument("instances", nargs="*", type=Path)
    s.set_defaults(func=_sweep)

    r = sub.add_parser("report", help="pivot a results CSV into figure series")
    common(r)
    r.add_argument("results", type=Path)
    r.set_defaults(func=_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        info = args.func(args)
        if info.get("written"):
            for path in info["written"]:
                print(path)
        return 0
    except UsageError as exc:
        kind, message, code = "usage", str(exc), 2
    except (bench.ConfigError, ValueError) as exc:
        kind, message, code = "invalid_input", str(exc), 1
    except OSError as exc:
        kind, message, code = "io", str(exc), 1
    except Exception as exc:
        kind, message, code = type(exc).__name__, str(exc), 1
    sys.stderr.write(json.dumps({"error": kind, "message": message, "command": command}) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
