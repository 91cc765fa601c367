#!/usr/bin/env python3
"""
NSGA-II on Kursawe for several population sizes.

summary.csv holds the median hypervolume of the final front (reference
point (-4, 25)) per population size.
"""

import argparse

from _common import median, repeated, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--popsizes", type=int, nargs="+", default=[25, 100, 400, 1600])
    ap.add_argument("--seeds", type=int, default=11)
    ap.add_argument("--generations", type=int, default=30)
    ap.add_argument("--mutation-stdev", type=float, default=None, help="defaults to the scenario default")
    ap.add_argument("--out", default="results/popsize_kursawe")
    args = ap.parse_args()

    rows = []
    for popsize in args.popsizes:
        print(f"popsize {popsize}")
        hv = repeated(
            "kursawe-nsga2", f"{args.out}/p{popsize}", range(args.seeds), "hypervolume",
            popsize=popsize, generations=args.generations, dim=3, mutation_stdev=args.mutation_stdev,
        )
        rows.append([popsize, median(hv), min(hv), max(hv)])
    write_table(f"{args.out}/summary.csv", ["popsize", "median_hypervolume", "min", "max"], rows)


if __name__ == "__main__":
    main()
