#!/usr/bin/env python3
"""
Pilot behind the default Gaussian mutation strength of kursawe-nsga2.

With a coarse mutation the large populations saturate the hypervolume
and the median ordering across population sizes becomes noise; this
sweep shows the effect for a few strengths.
"""

import argparse

from _common import median, repeated, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--stdevs", type=float, nargs="+", default=[0.1, 0.05, 0.02])
    ap.add_argument("--popsizes", type=int, nargs="+", default=[25, 100, 400, 1600])
    ap.add_argument("--seeds", type=int, default=11)
    ap.add_argument("--out", default="results/mutation_pilot")
    args = ap.parse_args()

    rows = []
    for stdev in args.stdevs:
        row = [stdev]
        for popsize in args.popsizes:
            print(f"stdev {stdev} popsize {popsize}")
            hv = repeated(
                "kursawe-nsga2", f"{args.out}/m{stdev}/p{popsize}", range(args.seeds), "hypervolume",
                popsize=popsize, generations=30, dim=3, mutation_stdev=stdev,
            )
            row.append(median(hv))
        rows.append(row)
    write_table(f"{args.out}/summary.csv", ["mutation_stdev", *[f"hv_p{p}" for p in args.popsizes]], rows)


if __name__ == "__main__":
    main()
