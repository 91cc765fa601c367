#!/usr/bin/env python3
"""
CEM against single and population-parallel Adam on sphere or Rastrigin.

Final values: CEM reports the fitness of its center, the Adam variants
report the best current point.
"""

import argparse
import sys
from pathlib import Path

from evokit.bench import RunConfig, run_scenario

from _common import median, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--function", choices=("sphere", "rastrigin"), default="rastrigin")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--popsize", type=int, default=1000)
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--generations", type=int, default=2000)
    ap.add_argument("--out", default="results/cem_vs_adam")
    args = ap.parse_args()

    finals = {"cem": [], "adam": [], "parallel_adam": []}
    for seed in range(args.seeds):
        out = Path(args.out) / args.function / f"seed{seed}"
        cfg = RunConfig(
            "cem-vs-adam", str(out), popsize=args.popsize, generations=args.generations,
            dim=args.dim, function=args.function, seed=seed, quiet=True, plot=True,
        )
        summary = run_scenario(cfg)
        print(f"  seed {seed}: " + " ".join(f"{k}={v:.4g}" for k, v in summary.items()), file=sys.stderr, flush=True)
        for k in finals:
            finals[k].append(summary[k])
    rows = [[k, median(v), min(v), max(v)] for k, v in finals.items()]
    write_table(Path(args.out) / args.function / "summary.csv", ["method", "median_final", "min", "max"], rows)


if __name__ == "__main__":
    main()
