"""
Benchmark scenarios.

Each scenario writes `run.csv` (one row per generation), `final.csv`
(last population with its evaluations) and `meta.json` (the full config)
into the output directory. `cem-vs-adam` writes one sub-directory per
method instead of a single `run.csv`.
"""

from __future__ import annotations

import dataclasses
import json
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .. import __version__
from ..core import ConfigError, RngStream, argsort_fitness
from ..es import CemConfig, EsState, SeparableGaussian, SnesConfig, es_step
from ..ga import GaConfig, GaussianMutation, TwoPointCrossOver, ga_step
from ..gp import gp_problem, opcode_mutation
from ..optim import Adam
from ..pareto import hypervolume_2d, non_dominated_sort
from ..problem import (
    eval_rastrigin,
    eval_sphere,
    grad_rastrigin,
    grad_sphere,
    kursawe_problem,
    rastrigin_problem,
    sphere_problem,
)
from .records import LogRecord, RunLog, StdoutLogger, write_population
from .svg import svg_convergence_plot

SCENARIOS = ("rastrigin-snes", "cem-vs-adam", "kursawe-nsga2", "gp-bench")

KURSAWE_REFERENCE = (-4.0, 25.0)

# scenario -> defaults for fields left as None
DEFAULTS = {
    "rastrigin-snes": dict(popsize=100, generations=4000, dim=100, stdev_init=5.0, lr_mu=1.0),
    "cem-vs-adam": dict(
        popsize=1000,
        generations=2000,
        dim=100,
        stdev_init=1.0,
        parenthood_ratio=0.5,
        max_change=0.02,
        step_size=0.6,
        function="rastrigin",
    ),
    "kursawe-nsga2": dict(popsize=100, generations=30, dim=3, mutation_stdev=0.02, tournament_size=2),
    "gp-bench": dict(popsize=1000, generations=50, dim=20, tournament_size=2),
}


@dataclass
class RunConfig:
    scenario: str
    out_dir: str
    popsize: Optional[int] = None
    generations: Optional[int] = None
    seed: int = 0
    workers: int = 1
    dim: Optional[int] = None
    stdev_init: Optional[float] = None
    lr_mu: Optional[float] = None
    lr_sigma: Optional[float] = None
    parenthood_ratio: Optional[float] = None
    max_change: Optional[float] = None
    step_size: Optional[float] = None
    function: Optional[str] = None
    mutation_stdev: Optional[float] = None
    tournament_size: Optional[int] = None
    log_interval: int = 1
    quiet: bool = False
    plot: bool = False

    def resolved(self) -> "RunConfig":
        """Copy with scenario defaults filled in and every field validated."""
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        cfg = dataclasses.replace(self)
        for name, value in DEFAULTS[self.scenario].items():
            if getattr(cfg, name) is None:
                setattr(cfg, name, value)
        for name in ("popsize", "generations", "workers", "dim", "log_interval"):
            if getattr(cfg, name) < 1:
                raise ConfigError(f"--{name.replace('_', '-')} must be at least 1")
        if cfg.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if cfg.scenario == "kursawe-nsga2" and cfg.dim != 3:
            raise ConfigError("kursawe-nsga2 is defined on exactly 3 variables (--dim 3)")
        if cfg.scenario == "cem-vs-adam":
            if cfg.function not in ("sphere", "rastrigin"):
                raise ConfigError("--function must be 'sphere' or 'rastrigin'")
            CemConfig(cfg.parenthood_ratio, cfg.max_change).num_parents(cfg.popsize)
        if cfg.scenario in ("kursawe-nsga2", "gp-bench") and cfg.popsize < 2:
            raise ConfigError("--popsize must be at least 2 for the genetic algorithm")
        if cfg.stdev_init is not None and cfg.stdev_init <= 0:
            raise ConfigError("--stdev-init must be positive")
        return cfg

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


class _Clock:
    def __init__(self):
        self.start = time.perf_counter()
        self.last = self.start

    def tick(self) -> tuple[float, float]:
        now = time.perf_counter()
        gen_seconds = now - self.last
        self.last = now
        return now - self.start, gen_seconds


def _stats(fitnesses: np.ndarray, sense="min") -> tuple[float, float, float]:
    best = fitnesses[argsort_fitness(fitnesses, sense)[0]]
    return float(best), float(np.mean(fitnesses)), float(np.median(fitnesses))


class _Recorder:
    """Feeds records to the run log and the optional stdout logger."""

    def __init__(self, cfg: RunConfig, label: str = ""):
        self.log = RunLog()
        self.logger = None if cfg.quiet else StdoutLogger(cfg.log_interval)
        self.clock = _Clock()
        self.best_ever = np.inf

    def record(self, generation: int, fitnesses: np.ndarray, **extra) -> LogRecord:
        best, mean, median = _stats(fitnesses)
        self.best_ever = min(self.best_ever, best)
        elapsed, gen_seconds = self.clock.tick()
        rec = LogRecord(generation, best, mean, median, self.best_ever, elapsed, gen_seconds, extra)
        self.log.append(rec)
        if self.logger is not None:
            self.logger(rec)
        return rec

    def finish(self, path: Path) -> None:
        if self.logger is not None:
            self.logger.close()
        self.log.write(path)


def _write_meta(out: Path, cfg: RunConfig, extra: Optional[dict] = None) -> None:
    meta = {
        "config": cfg.to_json(),
        "versions": {"evokit": __version__, "numpy": np.__version__, "python": platform.python_version()},
    }
    if extra:
        meta.update(extra)
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------------------


def run_rastrigin_snes(cfg: RunConfig, out: Path) -> dict:
    problem = rastrigin_problem(cfg.dim, num_workers=cfg.workers)
    rng = RngStream(cfg.seed)
    center = problem.generate_values(1, rng.derive("center"))[0]
    state = EsState(SeparableGaussian(center, cfg.stdev_init))
    algo = SnesConfig(cfg.lr_mu, cfg.lr_sigma)
    rec = _Recorder(cfg)
    values = fitnesses = None
    for g in range(cfg.generations):
        state, values, fitnesses = _traced_step(state, problem, algo, cfg.popsize, rng)
        rec.record(g + 1, fitnesses, sigma_mean=float(state.dist.sigma.mean()))
    rec.finish(out / "run.csv")
    write_population(out / "final.csv", values, fitnesses)
    return {"best_ever": rec.best_ever}


def _traced_step(state, problem, algo, popsize, rng):
    state = es_step(state, problem, algo, popsize, rng)
    return state, state.status["values"], state.status["evals"]


def run_cem_vs_adam(cfg: RunConfig, out: Path) -> dict:
    if cfg.function == "sphere":
        problem, fn, grad = sphere_problem(cfg.dim, num_workers=cfg.workers), eval_sphere, grad_sphere
    else:
        problem = rastrigin_problem(cfg.dim, bounds=(-10.0, 10.0), num_workers=cfg.workers)
        fn, grad = eval_rastrigin, grad_rastrigin
    rng = RngStream(cfg.seed)
    # row 0 is the shared starting point of CEM and single Adam
    starts = problem.generate_values(cfg.popsize, rng.derive("init"))
    x0 = starts[:1].copy()

    results = {}

    # CEM
    algo = CemConfig(cfg.parenthood_ratio, cfg.max_change)
    state = EsState(SeparableGaussian(x0[0], cfg.stdev_init))
    rec = _Recorder(cfg)
    for g in range(cfg.generations):
        state, values, fitnesses = _traced_step(state, problem, algo, cfg.popsize, rng.derive("cem"))
        center_eval = float(fn(state.dist.mu[None, :])[0])
        rec.record(g + 1, fitnesses, center_eval=center_eval)
    rec.finish(out / "cem" / "run.csv")
    write_population(out / "cem" / "final.csv", values, fitnesses)
    results["cem"] = center_eval

    # single Adam and population-parallel Adam follow identical per-row arithmetic
    for name, x in (("adam", x0.copy()), ("parallel_adam", starts.copy())):
        opt = Adam(cfg.step_size)
        rec = _Recorder(cfg)
        for g in range(cfg.generations):
            x = x - opt.step(grad(x))
            f = problem.evaluate_values(x)[:, 0]
            rec.record(g + 1, f)
        rec.finish(out / name / "run.csv")
        write_population(out / name / "final.csv", x, f)
        results[name] = float(np.min(f))
    return results


def _kursawe_hv(evals: np.ndarray) -> float:
    fronts = non_dominated_sort(evals, ("min", "min"))
    return hypervolume_2d(evals[fronts.fronts[0]], KURSAWE_REFERENCE)


def run_kursawe_nsga2(cfg: RunConfig, out: Path) -> dict:
    problem = kursawe_problem(num_workers=cfg.workers)
    rng = RngStream(cfg.seed)
    config = GaConfig(cfg.popsize, [TwoPointCrossOver(problem), GaussianMutation(cfg.mutation_stdev)], cfg.tournament_size)
    pop = problem.generate_batch(cfg.popsize, rng.derive("init"))
    problem.evaluate(pop)
    rec = _Recorder(cfg)
    for g in range(cfg.generations):
        pop = ga_step(pop, problem, config, rng.derive("ga", g))
        fronts = non_dominated_sort(pop.evals, problem.senses)
        front_evals = pop.evals[fronts.fronts[0]]
        rec.record(
            g + 1,
            pop.evals[:, 0],
            hypervolume=hypervolume_2d(front_evals, KURSAWE_REFERENCE),
            front_size=int(fronts.fronts[0].size),
        )
    rec.finish(out / "run.csv")
    write_population(out / "final.csv", pop.values, pop.evals)
    front = np.sort(non_dominated_sort(pop.evals, problem.senses).fronts[0])
    write_population(out / "front.csv", pop.values[front], pop.evals[front])
    return {"hypervolume": _kursawe_hv(pop.evals)}


def run_gp_bench(cfg: RunConfig, out: Path) -> dict:
    problem = gp_problem(cfg.dim, num_workers=cfg.workers)
    rng = RngStream(cfg.seed)
    config = GaConfig(cfg.popsize, [TwoPointCrossOver(problem), opcode_mutation()], cfg.tournament_size)
    pop = problem.generate_batch(cfg.popsize, rng.derive("init"))
    problem.evaluate(pop)
    rec = _Recorder(cfg)
    for g in range(cfg.generations):
        pop = ga_step(pop, problem, config, rng.derive("ga", g))
        rec.record(g + 1, pop.evals[:, 0])
    rec.finish(out / "run.csv")
    write_population(out / "final.csv", pop.values, pop.evals)
    return {"best": rec.best_ever}


RUNNERS: dict[str, Callable[[RunConfig, Path], dict]] = {
    "rastrigin-snes": run_rastrigin_snes,
    "cem-vs-adam": run_cem_vs_adam,
    "kursawe-nsga2": run_kursawe_nsga2,
    "gp-bench": run_gp_bench,
}


def run_scenario(config: RunConfig) -> dict:
    """Validate `config`, run it and write all output files. Returns a small summary."""
    cfg = config.resolved()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = RUNNERS[cfg.scenario](cfg, out)
    _write_meta(out, cfg)
    if cfg.plot:
        if cfg.scenario == "cem-vs-adam":
            for name in ("cem", "adam", "parallel_adam"):
                svg_convergence_plot(out / name / "run.csv", out / name / "plot.svg")
        else:
            svg_convergence_plot(out / "run.csv", out / "plot.svg")
    return summary


def config_from_meta(path, out_dir: Optional[str] = None) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    raw = data.get("config", data)
    unknown = set(raw) - fields
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
    try:
        cfg = RunConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"invalid config in {path}: {exc}") from exc
    if out_dir is not None:
        cfg.out_dir = str(out_dir)
    return cfg
