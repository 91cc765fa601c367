"""
Distribution-based search: SNES, CEM and PGPE over a separable Gaussian.

Every algorithm is split in two halves:

* ``estimate`` samples a (sub-)population, evaluates it and turns the
  result into a local estimate of how the distribution should move;
* ``apply`` updates the distribution from an estimate.

A regular step runs one ``estimate`` on the whole population. A
distributed step runs one ``estimate`` per worker on its own
sub-population, averages the estimates and then calls ``apply`` once, so
only distribution parameters and gradients cross the worker boundary.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    ConfigError,
    ContractError,
    ObjectiveSense,
    RngStream,
    argsort_fitness,
)
from .optim import Adam, ClipUp
from .problem import Problem

__all__ = [
    "CEM",
    "CemConfig",
    "EsState",
    "GradientPair",
    "PGPE",
    "PgpeConfig",
    "RankingMethod",
    "SNES",
    "SeparableGaussian",
    "SnesConfig",
    "StepError",
    "cem_step",
    "default_snes_lr_sigma",
    "default_snes_popsize",
    "distributed_step",
    "nes_utilities",
    "pgpe_gradients",
    "pgpe_step",
    "rank",
    "rank_centered",
    "sample",
    "snes_step",
]

SIGMA_FLOOR = 1e-30


class StepError(RuntimeError):
    """A worker failed during a distributed step; nothing was applied."""


class RankingMethod(enum.Enum):
    RAW = "raw"
    CENTERED = "centered"
    NES = "nes"

    @classmethod
    def parse(cls, value) -> "RankingMethod":
        if isinstance(value, RankingMethod):
            return value
        if value is None:
            return cls.RAW
        return cls(str(value).lower())


@dataclass
class SeparableGaussian:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.mu = np.array(self.mu, dtype=np.float64).ravel()
        self.sigma = np.array(np.broadcast_to(np.asarray(self.sigma, dtype=np.float64), self.mu.shape))
        if not np.all(self.sigma > 0):
            raise ConfigError("sigma must be strictly positive")

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    def copy(self) -> "SeparableGaussian":
        return SeparableGaussian(self.mu.copy(), self.sigma.copy())


@dataclass
class GradientPair:
    d_mu: np.ndarray
    d_sigma: np.ndarray


@dataclass
class EsState:
    dist: SeparableGaussian
    generation: int = 0
    status: dict = field(default_factory=dict)
    sigma_clamps: int = 0

    def copy(self) -> "EsState":
        return EsState(self.dist.copy(), self.generation, dict(self.status), self.sigma_clamps)


def _gen(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def _perturbations(dist: SeparableGaussian, popsize: int, rng, symmetric: bool):
    if symmetric and popsize % 2:
        raise ConfigError(f"symmetric sampling needs an even popsize, got {popsize}")
    gen = _gen(rng)
    if symmetric:
        eps = gen.standard_normal((popsize // 2, dist.dim)) * dist.sigma
        values = np.empty((popsize, dist.dim), dtype=np.float64)
        values[0::2] = dist.mu + eps
        values[1::2] = dist.mu - eps
        return values, eps
    s = gen.standard_normal((popsize, dist.dim))
    return dist.mu + dist.sigma * s, s


def sample(dist: SeparableGaussian, popsize: int, rng, symmetric: bool = False) -> np.ndarray:
    """
    Draw `popsize` rows from the distribution.

    With `symmetric=True` rows come in mirrored pairs: row 2k is
    `mu + eps_k` and row 2k+1 is `mu - eps_k`.
    """
    values, _ = _perturbations(dist, popsize, rng, symmetric)
    return values


# ----------------------------------------------------------------------------
# fitness shaping


def rank_centered(fitnesses, sense=ObjectiveSense.MIN) -> np.ndarray:
    """Utilities evenly spaced on [-0.5, 0.5]; the best solution gets +0.5."""
    fitnesses = np.asarray(fitnesses, dtype=np.float64).ravel()
    n = fitnesses.shape[0]
    if n < 2:
        raise ConfigError("rank_centered needs at least two fitnesses")
    best_first = argsort_fitness(fitnesses, ObjectiveSense.parse(sense))
    position = np.empty(n, dtype=np.float64)
    position[best_first] = np.arange(n - 1, -1, -1, dtype=np.float64)
    return position / (n - 1) - 0.5


def nes_utilities(popsize: int) -> np.ndarray:
    """Log-rank utilities for ranks 1..popsize (best first), summing to zero."""
    if popsize < 2:
        raise ConfigError("nes_utilities needs popsize >= 2")
    k = np.arange(1, popsize + 1, dtype=np.float64)
    raw = np.maximum(0.0, math.log(popsize / 2 + 1) - np.log(k))
    return raw / raw.sum() - 1.0 / popsize


def rank(fitnesses, sense=ObjectiveSense.MIN, method=RankingMethod.CENTERED) -> np.ndarray:
    """
    Shape fitnesses so that larger always means better.

    Unlike `rank_centered`, tied fitnesses share one utility here, because
    this is what the gradient estimators consume.
    """
    fitnesses = np.asarray(fitnesses, dtype=np.float64).ravel()
    sense = ObjectiveSense.parse(sense)
    method = RankingMethod.parse(method)
    if method is RankingMethod.RAW:
        return fitnesses.copy() if sense is ObjectiveSense.MAX else -fitnesses
    n = fitnesses.shape[0]
    best_first = argsort_fitness(fitnesses, sense)
    if method is RankingMethod.CENTERED:
        if n < 2:
            raise ConfigError("centered ranking needs at least two fitnesses")
        position = np.empty(n, dtype=np.float64)
        position[best_first] = np.arange(n - 1, -1, -1, dtype=np.float64)
        # averaging integer positions is exact, so a fully tied population maps to exactly 0
        return _average_ties(fitnesses, position) / (n - 1) - 0.5
    out = np.empty_like(fitnesses)
    out[best_first] = nes_utilities(n)
    return _average_ties(fitnesses, out)


def _average_ties(fitnesses: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """
    Give every group of equal fitnesses the mean score of the group.

    Without this, the stable tie order would hand a mirrored pair with
    identical fitness two different utilities and push the center along
    an arbitrary perturbation.
    """
    uniq, inverse = np.unique(fitnesses, return_inverse=True)
    if uniq.shape[0] == fitnesses.shape[0]:
        return scores
    sums = np.bincount(inverse, weights=scores)
    counts = np.bincount(inverse)
    return (sums / counts)[inverse]


def _exact_mean(x: np.ndarray) -> float:
    # the mean of identical values must be that value, not a rounded sum / n
    if np.all(x == x[0]):
        return float(x[0])
    return float(np.mean(x))


# ----------------------------------------------------------------------------
# local estimates and their averaging


@dataclass
class _Estimate:
    d_mu: np.ndarray
    d_sigma: np.ndarray
    # PGPE subtracts a per-population baseline in the sigma gradient; keeping
    # the baseline and the mean sigma feature lets averaged estimates be
    # corrected to the pooled baseline.
    baseline: float = 0.0
    sigma_basis: Optional[np.ndarray] = None


def _combine(estimates: Sequence[_Estimate]) -> GradientPair:
    if len(estimates) == 1:
        e = estimates[0]
        return GradientPair(e.d_mu, e.d_sigma)
    d_mu = np.mean([e.d_mu for e in estimates], axis=0)
    d_sigma = np.mean([e.d_sigma for e in estimates], axis=0)
    if estimates[0].sigma_basis is not None:
        baselines = np.array([e.baseline for e in estimates])
        bases = np.array([e.sigma_basis for e in estimates])
        d_sigma = d_sigma + (np.mean(baselines[:, None] * bases, axis=0) - baselines.mean() * bases.mean(axis=0))
    return GradientPair(d_mu, d_sigma)


def _pgpe_estimate(dist, samples, fitnesses, ranking, sense) -> _Estimate:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] % 2 or samples.shape[1] != dist.dim:
        raise ContractError("PGPE needs an even number of mirrored rows matching the distribution")
    plus, minus = samples[0::2], samples[1::2]
    eps = plus - dist.mu
    scale = np.abs(dist.mu) + np.abs(eps) + dist.sigma
    if not np.all(np.abs((minus - dist.mu) + eps) <= 1e-9 * scale):
        raise ContractError("samples are not mirrored pairs around the distribution center")
    r = rank(fitnesses, sense, ranking)
    r_plus, r_minus = r[0::2], r[1::2]
    baseline = _exact_mean(r)
    features = (eps * eps - dist.sigma**2) / dist.sigma
    d_mu = np.mean(((r_plus - r_minus) / 2)[:, None] * eps, axis=0)
    d_sigma = np.mean((((r_plus + r_minus) / 2) - baseline)[:, None] * features, axis=0)
    return _Estimate(d_mu, d_sigma, baseline, features.mean(axis=0))


def pgpe_gradients(
    dist: SeparableGaussian,
    samples: np.ndarray,
    fitnesses: np.ndarray,
    ranking=RankingMethod.CENTERED,
    sense=ObjectiveSense.MIN,
) -> GradientPair:
    """Symmetric-sampling PGPE gradients, pointing towards improvement."""
    return _combine([_pgpe_estimate(dist, samples, fitnesses, ranking, sense)])


# ----------------------------------------------------------------------------
# algorithm configurations


def default_snes_popsize(dim: int) -> int:
    return 4 + int(math.floor(3 * math.log(dim)))


def default_snes_lr_sigma(dim: int) -> float:
    return (3 + math.log(dim)) / (5 * math.sqrt(dim))


def _evaluate(problem: Problem, values: np.ndarray) -> np.ndarray:
    evals = problem.evaluate_values(values)
    if evals.shape[1] != 1:
        raise ContractError("distribution-based search needs a single-objective problem")
    return evals[:, 0]


@dataclass
class SnesConfig:
    lr_mu: float = 1.0
    lr_sigma: Optional[float] = None

    def estimate(self, dist, problem, popsize, rng):
        values, s = _perturbations(dist, popsize, rng, symmetric=False)
        fitnesses = _evaluate(problem, values)
        u = rank(fitnesses, problem.sense, RankingMethod.NES)
        return _Estimate(u @ s, u @ (s * s - 1.0)), values, fitnesses

    def apply(self, dist, grad: GradientPair) -> SeparableGaussian:
        lr_sigma = default_snes_lr_sigma(dist.dim) if self.lr_sigma is None else self.lr_sigma
        mu = dist.mu + self.lr_mu * dist.sigma * grad.d_mu
        sigma = dist.sigma * np.exp((lr_sigma / 2) * grad.d_sigma)
        return mu, sigma


@dataclass
class CemConfig:
    parenthood_ratio: float = 0.5
    max_change: Optional[float] = None

    def __post_init__(self):
        if not (0 < self.parenthood_ratio <= 1):
            raise ConfigError("parenthood_ratio must be in (0, 1]")

    def num_parents(self, popsize: int) -> int:
        n = int(math.floor(popsize * self.parenthood_ratio))
        if n < 2:
            raise ConfigError(f"popsize {popsize} with ratio {self.parenthood_ratio} gives fewer than 2 parents")
        return n

    def estimate(self, dist, problem, popsize, rng):
        n_parents = self.num_parents(popsize)
        values, _ = _perturbations(dist, popsize, rng, symmetric=False)
        fitnesses = _evaluate(problem, values)
        parents = values[argsort_fitness(fitnesses, problem.sense)[:n_parents]]
        new_mu = parents.mean(axis=0)
        sigma_raw = np.sqrt(np.mean((parents - new_mu) ** 2, axis=0))
        return _Estimate(new_mu - dist.mu, sigma_raw - dist.sigma), values, fitnesses

    def apply(self, dist, grad: GradientPair):
        mu = dist.mu + grad.d_mu
        sigma = dist.sigma + grad.d_sigma
        if self.max_change is not None:
            sigma = np.clip(sigma, dist.sigma * (1 - self.max_change), dist.sigma * (1 + self.max_change))
        return mu, sigma


@dataclass
class PgpeConfig:
    optimizer: Union[ClipUp, Adam]
    lr_sigma: float = 0.1
    ranking: RankingMethod = RankingMethod.CENTERED

    def __post_init__(self):
        self.ranking = RankingMethod.parse(self.ranking)

    def estimate(self, dist, problem, popsize, rng):
        values = sample(dist, popsize, rng, symmetric=True)
        fitnesses = _evaluate(problem, values)
        return _pgpe_estimate(dist, values, fitnesses, self.ranking, problem.sense), values, fitnesses

    def apply(self, dist, grad: GradientPair):
        mu = dist.mu + self.optimizer.step(grad.d_mu)
        sigma = dist.sigma + self.lr_sigma * grad.d_sigma
        return mu, sigma


AlgoConfig = Union[SnesConfig, CemConfig, PgpeConfig]


# ----------------------------------------------------------------------------
# steps


def _population_status(problem: Problem, values: np.ndarray, fitnesses: np.ndarray) -> dict:
    best = argsort_fitness(fitnesses, problem.sense)[0]
    return {
        "best_eval": float(fitnesses[best]),
        "mean_eval": float(np.mean(fitnesses)),
        "median_eval": float(np.median(fitnesses)),
        "pop_best": values[best].copy(),
        "values": values,
        "evals": fitnesses,
    }


def _advance(state: EsState, algo: AlgoConfig, problem: Problem, grad: GradientPair, values, fitnesses) -> EsState:
    mu, sigma = algo.apply(state.dist, grad)
    clamped = sigma < SIGMA_FLOOR
    sigma = np.where(clamped, SIGMA_FLOOR, sigma)
    dist = SeparableGaussian(mu, sigma)
    status = _population_status(problem, values, fitnesses)
    status["center"] = dist.mu.copy()
    return EsState(dist, state.generation + 1, status, state.sigma_clamps + int(clamped.any()))


def _worker_stream(rng: RngStream, generation: int, worker: int) -> RngStream:
    return rng.derive(generation, worker)


def es_step(state: EsState, problem: Problem, algo: AlgoConfig, popsize: int, rng: RngStream) -> EsState:
    """One centralized generation of `algo`."""
    if problem.is_multi_objective:
        raise ContractError("distribution-based search needs a single-objective problem")
    stream = _worker_stream(rng, state.generation, 0)
    estimate, values, fitnesses = algo.estimate(state.dist, problem, popsize, stream)
    return _advance(state, algo, problem, _combine([estimate]), values, fitnesses)


def distributed_step(
    state: EsState,
    problem: Problem,
    num_workers: int,
    popsize_per_worker: int,
    algo: AlgoConfig,
    rng: RngStream,
) -> EsState:
    """
    One generation in semi-update mode.

    Worker w samples `popsize_per_worker` solutions from its own stream
    (derived from the generation and w), evaluates them and returns a
    local gradient; the averaged gradient drives a single update.
    """
    if num_workers < 1:
        raise ConfigError("num_workers must be at least 1")
    if problem.is_multi_objective:
        raise ContractError("distribution-based search needs a single-objective problem")
    dist = state.dist.copy()

    def work(w: int):
        return algo.estimate(dist, problem, popsize_per_worker, _worker_stream(rng, state.generation, w))

    try:
        if num_workers == 1:
            results = [work(0)]
        else:
            with ThreadPoolExecutor(max_workers=num_workers) as pool:
                results = list(pool.map(work, range(num_workers)))
    except Exception as exc:
        raise StepError(f"worker failed during generation {state.generation}: {exc}") from exc
    grad = _combine([r[0] for r in results])
    values = np.concatenate([r[1] for r in results], axis=0)
    fitnesses = np.concatenate([r[2] for r in results], axis=0)
    return _advance(state, algo, problem, grad, values, fitnesses)


def local_gradient(state: EsState, problem: Problem, popsize: int, algo: AlgoConfig, rng: RngStream, worker: int = 0):
    """The gradient worker `worker` would report, with its samples and fitnesses."""
    estimate, values, fitnesses = algo.estimate(
        state.dist, problem, popsize, _worker_stream(rng, state.generation, worker)
    )
    return _combine([estimate]), values, fitnesses


def snes_step(state, problem, popsize, lr_mu=1.0, lr_sigma=None, rng=None) -> EsState:
    return es_step(state, problem, SnesConfig(lr_mu, lr_sigma), popsize, rng)


def cem_step(state, problem, popsize, parenthood_ratio=0.5, max_change=None, rng=None) -> EsState:
    return es_step(state, problem, CemConfig(parenthood_ratio, max_change), popsize, rng)


def pgpe_step(state, problem, popsize, optimizer, lr_sigma=0.1, ranking=RankingMethod.CENTERED, rng=None) -> EsState:
    if popsize % 2:
        raise ConfigError("PGPE needs an even popsize")
    return es_step(state, problem, PgpeConfig(optimizer, lr_sigma, ranking), popsize, rng)


# ----------------------------------------------------------------------------
# searcher objects


class _GaussianSearcher:
    """Holds an algorithm configuration plus the evolving state."""

    def __init__(
        self,
        problem: Problem,
        algo: AlgoConfig,
        *,
        popsize: int,
        stdev_init,
        center_init=None,
        seed: int = 0,
        distributed: bool = False,
        num_workers: int = 1,
    ):
        self.problem = problem
        self.algo = algo
        self.popsize = popsize
        self.rng = RngStream(seed)
        if center_init is None:
            center_init = problem.generate_values(1, self.rng.derive("center"))[0].astype(np.float64)
        self.state = EsState(SeparableGaussian(center_init, stdev_init))
        self.distributed = distributed
        self.num_workers = num_workers
        if distributed and popsize % num_workers:
            raise ConfigError("popsize must split evenly across workers in distributed mode")

    @property
    def status(self) -> dict:
        return self.state.status

    def step(self) -> EsState:
        if self.distributed:
            self.state = distributed_step(
                self.state, self.problem, self.num_workers, self.popsize // self.num_workers, self.algo, self.rng
            )
        else:
            self.state = es_step(self.state, self.problem, self.algo, self.popsize, self.rng)
        return self.state

    def run(self, generations: int, callbacks=()):
        for _ in range(generations):
            self.step()
            for cb in callbacks:
                cb(self.state)
        return self.state


class SNES(_GaussianSearcher):
    def __init__(self, problem, *, stdev_init, popsize=None, lr_mu=1.0, lr_sigma=None, **kwargs):
        popsize = default_snes_popsize(problem.solution_length) if popsize is None else popsize
        super().__init__(problem, SnesConfig(lr_mu, lr_sigma), popsize=popsize, stdev_init=stdev_init, **kwargs)


class CEM(_GaussianSearcher):
    def __init__(self, problem, *, popsize, stdev_init, parenthood_ratio=0.5, max_change=None, **kwargs):
        algo = CemConfig(parenthood_ratio, max_change)
        algo.num_parents(popsize)
        super().__init__(problem, algo, popsize=popsize, stdev_init=stdev_init, **kwargs)


class PGPE(_GaussianSearcher):
    def __init__(
        self,
        problem,
        *,
        popsize,
        stdev_init,
        center_learning_rate,
        stdev_learning_rate=0.1,
        optimizer="clipup",
        max_speed=None,
        ranking="centered",
        **kwargs,
    ):
        if popsize % 2:
            raise ConfigError("PGPE needs an even popsize")
        if optimizer == "clipup":
            opt = ClipUp(center_learning_rate, 2 * center_learning_rate if max_speed is None else max_speed)
        elif optimizer == "adam":
            opt = Adam(center_learning_rate)
        else:
            raise ConfigError(f"unknown optimizer {optimizer!r}")
        algo = PgpeConfig(opt, stdev_learning_rate, ranking)
        super().__init__(problem, algo, popsize=popsize, stdev_init=stdev_init, **kwargs)
