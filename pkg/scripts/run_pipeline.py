#!/usr/bin/env python3
"""
Run the whole pipeline on generated fixtures: fixtures, estimate, regress
(all catalogue models), granger and stats. With --twice the pipeline runs
into two directories and the outputs are compared byte for byte.

Usage:
  python3 scripts/run_pipeline.py --out pipeline_out --seed 0 --twice
"""
from pathlib import Path
import argparse
import filecmp
import sys

from crashskew.cli import main as crashskew


def run_once(out: Path, seed: int, multistart: int) -> int:
    fixtures = out / "fixtures"
    results = out / "results"
    inputs = [
        "--cases", str(fixtures / "cases.csv"),
        "--deaths", str(fixtures / "deaths.csv"),
        "--global-cases", str(fixtures / "global_cases.csv"),
        "--global-deaths", str(fixtures / "global_deaths.csv"),
        "--search", str(fixtures / "search.csv"),
    ]
    steps = [
        ["fixtures", "--out", str(fixtures)],
        ["estimate", "--returns", str(fixtures / "returns.csv"), "--multistart", str(multistart), "--out", str(results)],
        ["regress", *inputs, "--skew", str(results / "skew_series.csv"), "--models", "all", "--out", str(results)],
        ["granger", *inputs, "--skew", str(results / "skew_series.csv"), "--out", str(results)],
        ["stats", "--returns", str(fixtures / "returns.csv"), "--skew", str(results / "skew_series.csv"),
         "--split-date", "2020-01-20", "--out", str(results)],
    ]
    for step in steps:
        code = crashskew([*step, "--seed", str(seed)])
        if code != 0:
            print(f"step {step[0]} failed with exit code {code}", file=sys.stderr)
            return code
    return 0


def compare(first: Path, second: Path) -> list:
    names = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    return [str(n) for n in names if not filecmp.cmp(first / n, second / n, shallow=False)]


def main():
    parser = argparse.ArgumentParser(description="Run the crashskew pipeline end to end")
    parser.add_argument("--out", default="pipeline_out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--multistart", type=int, default=3)
    parser.add_argument("--twice", action="store_true", help="run twice and compare outputs")
    args = parser.parse_args()

    out = Path(args.out)
    runs = [out / "run1", out / "run2"] if args.twice else [out]
    for run in runs:
        code = run_once(run, args.seed, args.multistart)
        if code:
            return code

    if args.twice:
        differing = compare(runs[0], runs[1])
        if differing:
            print("outputs differ: " + ", ".join(differing))
            return 1
        print("outputs identical across runs")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
