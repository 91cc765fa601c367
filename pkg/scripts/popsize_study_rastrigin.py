#!/usr/bin/env python3
"""
SNES on 100-d Rastrigin for several population sizes.

Writes one run directory per (popsize, seed) plus summary.csv with the
median best-ever fitness per population size. The defaults are the full
acceptance setting (about four minutes on a laptop); use --generations
and --seeds for a quick look.
"""

import argparse

from _common import median, repeated, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--popsizes", type=int, nargs="+", default=[25, 100, 400, 1600])
    ap.add_argument("--seeds", type=int, default=11)
    ap.add_argument("--generations", type=int, default=4000)
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--stdev-init", type=float, default=5.0)
    ap.add_argument("--out", default="results/popsize_rastrigin")
    args = ap.parse_args()

    rows = []
    for popsize in args.popsizes:
        print(f"popsize {popsize}")
        best = repeated(
            "rastrigin-snes", f"{args.out}/p{popsize}", range(args.seeds), "best_ever",
            popsize=popsize, generations=args.generations, dim=args.dim, stdev_init=args.stdev_init,
        )
        rows.append([popsize, median(best), min(best), max(best)])
    write_table(f"{args.out}/summary.csv", ["popsize", "median_best_ever", "min", "max"], rows)


if __name__ == "__main__":
    main()
