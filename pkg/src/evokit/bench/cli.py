"""
Command line entry point.

    evokit bench <scenario> --popsize N --generations N --seed N --workers N --dim N --out DIR [flags]
    evokit rerun META_JSON --out DIR
    evokit plot RUN_CSV OUT_SVG

Exit codes: 0 success, 1 runtime failure, 2 invalid usage or configuration.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

from ..core import ConfigError
from .scenarios import SCENARIOS, RunConfig, config_from_meta, run_scenario
from .svg import PlotError, svg_convergence_plot


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evokit", description="Vectorized evolutionary computation benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark scenario")
    bench.add_argument("scenario", choices=SCENARIOS)
    bench.add_argument("--popsize", type=_positive_int)
    bench.add_argument("--generations", type=_positive_int)
    bench.add_argument("--seed", type=_seed, default=0)
    bench.add_argument("--workers", type=_positive_int, default=1)
    bench.add_argument("--dim", type=_positive_int)
    bench.add_argument("--out", required=True, help="output directory")
    bench.add_argument("--stdev-init", type=float)
    bench.add_argument("--lr-mu", type=float, help="SNES center learning rate")
    bench.add_argument("--lr-sigma", type=float, help="SNES stdev learning rate")
    bench.add_argument("--parenthood-ratio", type=float)
    bench.add_argument("--max-change", type=float, help="CEM per-generation stdev change limit (fraction)")
    bench.add_argument("--step-size", type=float, help="Adam step size")
    bench.add_argument("--function", choices=("sphere", "rastrigin"))
    bench.add_argument("--mutation-stdev", type=float)
    bench.add_argument("--tournament-size", type=_positive_int)
    bench.add_argument("--log-interval", type=_positive_int, default=1)
    bench.add_argument("--quiet", action="store_true", help="no per-generation status lines")
    bench.add_argument("--plot", action="store_true", help="also write plot.svg")

    rerun = sub.add_parser("rerun", help="re-run a scenario from its meta.json")
    rerun.add_argument("meta")
    rerun.add_argument("--out", required=True)
    rerun.add_argument("--quiet", action="store_true")

    plot = sub.add_parser("plot", help="convergence plot of a run.csv")
    plot.add_argument("run_csv")
    plot.add_argument("out_svg")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        scenario=args.scenario,
        out_dir=args.out,
        popsize=args.popsize,
        generations=args.generations,
        seed=args.seed,
        workers=args.workers,
        dim=args.dim,
        stdev_init=args.stdev_init,
        lr_mu=args.lr_mu,
        lr_sigma=args.lr_sigma,
        parenthood_ratio=args.parenthood_ratio,
        max_change=args.max_change,
        step_size=args.step_size,
        function=args.function,
        mutation_stdev=args.mutation_stdev,
        tournament_size=args.tournament_size,
        log_interval=args.log_interval,
        quiet=args.quiet,
        plot=args.plot,
    )
    threads = os.environ.get("EVOKIT_THREADS")
    if threads:
        try:
            cfg.workers = int(threads)
        except ValueError:
            raise ConfigError(f"EVOKIT_THREADS must be an integer, got {threads!r}") from None
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "plot":
            svg_convergence_plot(args.run_csv, args.out_svg)
            return 0
        if args.command == "rerun":
            cfg = config_from_meta(args.meta, args.out)
            cfg.quiet = cfg.quiet or args.quiet
        else:
            cfg = _config_from_args(args)
        run_scenario(cfg)
    except (ConfigError, PlotError) as exc:
        print(f"evokit: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
