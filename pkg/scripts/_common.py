"""Helpers shared by the experiment scripts: repeated runs and summary tables."""

import csv
import statistics
import sys
from pathlib import Path

from evokit.bench import RunConfig, run_scenario


def repeated(scenario, out_root, seeds, key, **kw):
    """Run `scenario` once per seed (sequentially) and return the summary values under `key`."""
    values = []
    for seed in seeds:
        out = Path(out_root) / f"seed{seed}"
        summary = run_scenario(RunConfig(scenario, str(out), seed=seed, quiet=True, **kw))
        values.append(summary[key])
        print(f"  seed {seed}: {key}={summary[key]:.6g}", file=sys.stderr, flush=True)
    return values


def write_table(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    for row in [header, *rows]:
        print("  ".join(f"{c:>14}" if not isinstance(c, float) else f"{c:>14.6g}" for c in row))


def median(xs):
    return statistics.median(xs)
