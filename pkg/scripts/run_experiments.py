#!/usr/bin/env python3
"""Run the built-in six-experiment comparison matrix and print the tables.

Usage:
    python scripts/run_experiments.py [--out OUT_DIR] [--jobs N] [--seed N]

Outputs land in OUT_DIR (default ./out/table3): one directory per experiment
with vehicles.csv / trace.csv / messages.csv / detectors.csv / summary.json,
plus comparison.json and comparison.txt at the top level.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cvsim.cli import _data_path
from cvsim.matrix import format_comparison, load_matrix, run_matrix


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/table3")
    parser.add_argument("--jobs", type=int, default=2)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    matrix = load_matrix(_data_path("table3.matrix"))
    if args.seed is not None:
        matrix = dataclasses.replace(matrix, seed=args.seed)
    comparison = run_matrix(matrix, args.out, jobs=args.jobs)
    print(format_comparison(comparison))
    print(f"run outputs in {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
