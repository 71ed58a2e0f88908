"""Command-line interface: run scenarios, run matrices, validate networks."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from importlib import resources
from pathlib import Path

from .engine import run_scenario
from .matrix import format_comparison, load_matrix, run_matrix
from .network import NetworkError, load_network, save_network
from .networks import BUILTIN_NETWORKS
from .scenario import ConfigError, load_scenario


def _data_path(name: str) -> Path:
    return Path(str(resources.files("cvsim").joinpath("data", name)))


def cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    summary = run_scenario(config, outdir=args.out)
    brief = {
        "arrived": summary["counts"]["arrived"],
        "mean_delay": summary["delay"]["mean"],
        "mean_journey_time": summary["journey_time"]["mean"],
        "reroute_count": summary["reroute_count"],
        "deceleration_mean": summary["deceleration"]["mean"],
    }
    print(json.dumps(brief, indent=2, sort_keys=True))
    if args.out:
        print(f"outputs written to {args.out}", file=sys.stderr)
    return 0


def cmd_matrix(args) -> int:
    path = args.config
    if path == "table3":
        path = _data_path("table3.matrix")
    matrix = load_matrix(path)
    comparison = run_matrix(matrix, args.out, jobs=args.jobs)
    print(format_comparison(comparison))
    return 0


def cmd_net_validate(args) -> int:
    network = load_network(args.file)
    print(
        f"OK: {len(network.nodes)} nodes, {len(network.edges)} edges, "
        f"{sum(e.length for e in network.edges.values()):.0f} m total"
    )
    return 0


def cmd_net_export(args) -> int:
    if args.name not in BUILTIN_NETWORKS:
        raise ConfigError(
            f"unknown builtin network {args.name!r}; "
            f"available: {', '.join(sorted(BUILTIN_NETWORKS))}"
        )
    save_network(BUILTIN_NETWORKS[args.name](), args.file)
    print(f"wrote {args.file}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvsim",
        description="Deterministic traffic + V2V co-simulator for breakdown "
                    "warning and rerouting experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=cmd_run)

    p_matrix = sub.add_parser("matrix", help="run an experiment matrix")
    p_matrix.add_argument("--config", required=True,
                          help="matrix file, or 'table3' for the built-in "
                               "six-experiment matrix")
    p_matrix.add_argument("--jobs", type=int, default=1)
    p_matrix.add_argument("--out", required=True)
    p_matrix.set_defaults(func=cmd_matrix)

    p_net = sub.add_parser("net", help="network file utilities")
    net_sub = p_net.add_subparsers(dest="net_command", required=True)
    p_validate = net_sub.add_parser("validate", help="validate a network file")
    p_validate.add_argument("file")
    p_validate.set_defaults(func=cmd_net_validate)
    p_export = net_sub.add_parser("export", help="write a builtin network to a file")
    p_export.add_argument("name")
    p_export.add_argument("file")
    p_export.set_defaults(func=cmd_net_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NetworkError, FileNotFoundError, ValueError,
            KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
