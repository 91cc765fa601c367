#!/usr/bin/env python3
"""Per-generation wall clock of the GP benchmark as the population grows (measured only)."""

import argparse
import statistics
from pathlib import Path

from evokit.bench import RunConfig, run_scenario
from evokit.bench.records import read_csv

from _common import write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--popsizes", type=int, nargs="+", default=[1000, 2000, 4000, 8000, 16000])
    ap.add_argument("--generations", type=int, default=50)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/gp_timing")
    args = ap.parse_args()

    rows = []
    for popsize in args.popsizes:
        out = Path(args.out) / f"p{popsize}"
        summary = run_scenario(
            RunConfig("gp-bench", str(out), popsize=popsize, generations=args.generations, workers=args.workers, quiet=True)
        )
        secs = [float(r["generation_seconds"]) for r in read_csv(out / "run.csv")[1]]
        rows.append([popsize, statistics.median(secs), summary["best"]])
    write_table(Path(args.out) / "summary.csv", ["popsize", "median_generation_seconds", "best_mse"], rows)


if __name__ == "__main__":
    main()
