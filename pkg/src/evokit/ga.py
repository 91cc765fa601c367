"""
Elitist genetic algorithm with pluggable operators.

Operators are callables `op(values, rng) -> values` applied in sequence to
the selected parents. With one objective the merged parent+child pool is
truncated by fitness; with several objectives it is truncated by Pareto
front and crowding distance (NSGA-II).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    ConfigError,
    ContractError,
    RngStream,
    SolutionBatch,
    StateError,
    argsort_fitness,
    concat,
)
from .pareto import non_dominated_sort, pareto_order
from .problem import Problem

__all__ = [
    "GaConfig",
    "GeneticAlgorithm",
    "TwoPointCrossOver",
    "bitflip_mutation",
    "ga_step",
    "ga_step_multi",
    "ga_step_single",
    "gaussian_mutation",
    "two_point_crossover",
]

Operator = Callable[[np.ndarray, np.random.Generator], np.ndarray]


def _generator(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def swap_segments(parents: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """Children of consecutive parent pairs with columns [a, b) exchanged; `cuts` is (pairs, 2)."""
    first, second = parents[0::2], parents[1::2]
    cols = np.arange(parents.shape[1])
    inside = (cols >= cuts[:, :1]) & (cols < cuts[:, 1:])
    children = np.empty_like(parents)
    children[0::2] = np.where(inside, second, first)
    children[1::2] = np.where(inside, first, second)
    return children


def two_point_crossover(parents: np.ndarray, rng) -> np.ndarray:
    parents = np.asarray(parents)
    if parents.ndim != 2 or parents.shape[1] < 1:
        raise ContractError("parents must be a (rows, cols>=1) matrix")
    if parents.shape[0] % 2:
        raise ContractError(f"two-point crossover needs an even number of parents, got {parents.shape[0]}")
    pairs = parents.shape[0] // 2
    cuts = np.sort(_generator(rng).integers(0, parents.shape[1] + 1, size=(pairs, 2)), axis=1)
    return swap_segments(parents, cuts)


class TwoPointCrossOver:
    """Operator form of `two_point_crossover`; pads odd parent counts by repeating the last row."""

    def __init__(self, problem: Problem = None):
        self.problem = problem

    def __call__(self, values: np.ndarray, rng) -> np.ndarray:
        n = values.shape[0]
        if n % 2:
            values = np.concatenate([values, values[-1:]], axis=0)
        return two_point_crossover(values, rng)[:n]


def gaussian_mutation(values: np.ndarray, stdev: float, rng) -> np.ndarray:
    values = np.asarray(values)
    if not np.issubdtype(values.dtype, np.floating):
        raise ContractError(f"gaussian mutation needs floating-point values, got {values.dtype}")
    noise = _generator(rng).standard_normal(values.shape) * stdev
    return (values + noise).astype(values.dtype, copy=False)


def bitflip_mutation(values: np.ndarray, rng, rate: float = None) -> np.ndarray:
    values = np.asarray(values, dtype=bool)
    rate = 1.0 / values.shape[1] if rate is None else rate
    return values ^ (_generator(rng).random(values.shape) < rate)


class GaussianMutation:
    def __init__(self, stdev: float):
        self.stdev = stdev

    def __call__(self, values, rng):
        return gaussian_mutation(values, self.stdev, rng)


class BitFlipMutation:
    def __init__(self, rate: float = None):
        self.rate = rate

    def __call__(self, values, rng):
        return bitflip_mutation(values, rng, self.rate)


@dataclass
class GaConfig:
    popsize: int
    operators: Sequence[Operator] = field(default_factory=list)
    tournament_size: int = 2

    def __post_init__(self):
        if self.popsize < 2:
            raise ConfigError("popsize must be at least 2")
        if not self.operators:
            raise ConfigError("at least one operator is required")
        if self.tournament_size < 1:
            raise ConfigError("tournament_size must be at least 1")


def tournament(position: np.ndarray, count: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """
    Winners of `count` tournaments among uniformly drawn contestants.

    `position[i]` is row i's place in the best-first ordering, so the
    smallest position wins and ties cannot occur.
    """
    contestants = gen.integers(0, position.shape[0], size=(count, size))
    winner_col = np.argmin(position[contestants], axis=1)
    return contestants[np.arange(count), winner_col]


def _order_positions(order: np.ndarray) -> np.ndarray:
    position = np.empty_like(order)
    position[order] = np.arange(order.shape[0])
    return position


def _breed(pop: SolutionBatch, problem: Problem, config: GaConfig, order: np.ndarray, gen) -> SolutionBatch:
    n_parents = config.popsize + (config.popsize % 2)
    parent_idx = tournament(_order_positions(order), n_parents, config.tournament_size, gen)
    values = pop.values[parent_idx]
    for op in config.operators:
        values = np.asarray(op(values, gen))
        if values.ndim != 2 or values.shape[1] != pop.solution_length:
            raise ContractError("operators must keep the solution length")
        if values.dtype != pop.values.dtype:
            raise ContractError(f"operator changed dtype from {pop.values.dtype} to {values.dtype}")
    children = SolutionBatch(values[: config.popsize], num_objectives=problem.num_objectives)
    problem.evaluate(children)
    return children


def _check(pop: SolutionBatch):
    if not pop.is_evaluated:
        raise StateError("the population must be evaluated before a GA step")


def ga_step_single(pop: SolutionBatch, problem: Problem, config: GaConfig, rng) -> SolutionBatch:
    """Tournament selection, operators, then the best `popsize` of parents + children."""
    _check(pop)
    if problem.is_multi_objective:
        raise ContractError("ga_step_single needs a single-objective problem")
    gen = _generator(rng)
    order = argsort_fitness(pop.evals[:, 0], problem.sense)
    children = _breed(pop, problem, config, order, gen)
    return concat(pop, children).take_best(config.popsize, problem.sense)


def ga_step_multi(pop: SolutionBatch, problem: Problem, config: GaConfig, rng) -> SolutionBatch:
    """NSGA-II generation: crowded-comparison tournaments and rank/crowding truncation."""
    _check(pop)
    if not problem.is_multi_objective:
        raise ContractError("ga_step_multi needs at least two objectives")
    gen = _generator(rng)
    order = pareto_order(pop.evals, problem.senses)
    children = _breed(pop, problem, config, order, gen)
    merged = concat(pop, children)
    keep = pareto_order(merged.evals, problem.senses)[: config.popsize]
    return merged.take(keep)


def ga_step(pop: SolutionBatch, problem: Problem, config: GaConfig, rng) -> SolutionBatch:
    if problem.is_multi_objective:
        return ga_step_multi(pop, problem, config, rng)
    return ga_step_single(pop, problem, config, rng)


class GeneticAlgorithm:
    """
    Stateful driver around `ga_step`.

    Generation g draws its randomness from `RngStream(seed).derive("ga", g)`,
    so a run is reproducible from the seed alone.
    """

    def __init__(self, problem: Problem, *, popsize: int, operators, tournament_size: int = 2, seed: int = 0):
        self.problem = problem
        self.config = GaConfig(popsize, list(operators), tournament_size)
        self.rng = RngStream(seed)
        self.generation = 0
        self.population = problem.generate_batch(popsize, self.rng.derive("init"))
        problem.evaluate(self.population)

    def step(self) -> SolutionBatch:
        stream = self.rng.derive("ga", self.generation)
        self.population = ga_step(self.population, self.problem, self.config, stream)
        self.generation += 1
        return self.population

    def run(self, generations: int, callbacks=()):
        for _ in range(generations):
            self.step()
            for cb in callbacks:
                cb(self)
        return self.population

    def front(self) -> SolutionBatch:
        """Non-dominated rows of the current population (whole population order kept)."""
        fronts = non_dominated_sort(self.population.evals, self.problem.senses)
        return self.population.take(np.sort(fronts.fronts[0]))
