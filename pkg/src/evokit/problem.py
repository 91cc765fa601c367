"""
Problem definitions and vectorized fitness evaluation.

A fitness function receives a (k, n) matrix of solutions and returns
either a (k,) vector (single objective) or a (k, m) matrix. It must be
row-local and pure; `Problem.evaluate` relies on that to split a batch
into contiguous chunks and evaluate them on a thread pool.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import (
    ConfigError,
    Dtype,
    ObjectiveSense,
    RngStream,
    ShapeError,
    SolutionBatch,
    _as_generator,
    parse_senses,
)

__all__ = [
    "Problem",
    "eval_kursawe",
    "eval_rastrigin",
    "eval_sphere",
    "grad_rastrigin",
    "grad_sphere",
    "kursawe_problem",
    "rastrigin_problem",
    "sphere_problem",
    "vectorized",
]

Bounds = Union[tuple[float, float], tuple[Sequence[float], Sequence[float]]]
VectorizedFitness = Callable[[np.ndarray], np.ndarray]


def vectorized(fn: VectorizedFitness) -> VectorizedFitness:
    """Mark `fn` as batch-in/batch-out. Purely declarative."""
    fn.__evokit_vectorized__ = True
    return fn


def _require_float(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError(f"expected a 2-D batch, got shape {x.shape}")
    if not np.issubdtype(x.dtype, np.floating):
        raise ShapeError(f"expected a floating-point batch, got {x.dtype}")
    return x


@vectorized
def eval_sphere(x: np.ndarray) -> np.ndarray:
    x = _require_float(x)
    return np.sum(x * x, axis=1, dtype=np.float64)


@vectorized
def eval_rastrigin(x: np.ndarray) -> np.ndarray:
    x = _require_float(x).astype(np.float64, copy=False)
    n = x.shape[1]
    return 10.0 * n + np.sum(x * x - 10.0 * np.cos(2.0 * math.pi * x), axis=1)


@vectorized
def eval_kursawe(x: np.ndarray) -> np.ndarray:
    x = _require_float(x).astype(np.float64, copy=False)
    if x.shape[1] != 3:
        raise ShapeError(f"Kursawe is defined on 3 variables, got {x.shape[1]}")
    f1 = np.sum(-10.0 * np.exp(-0.2 * np.sqrt(x[:, 0:2] ** 2 + x[:, 1:3] ** 2)), axis=1)
    f2 = np.sum(np.abs(x) ** 0.8 + 5.0 * np.sin(x**3), axis=1)
    return np.stack([f1, f2], axis=1)


def grad_sphere(x: np.ndarray) -> np.ndarray:
    return 2.0 * np.asarray(x, dtype=np.float64)


def grad_rastrigin(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * x + 20.0 * math.pi * np.sin(2.0 * math.pi * x)


@dataclass(frozen=True)
class Problem:
    """
    Objective senses, solution layout and the fitness function.

    `initial_bounds` is either a scalar pair `(lo, hi)` shared by every
    variable or a pair of per-variable sequences. Boolean problems do not
    need bounds.
    """

    senses: tuple
    fitness: VectorizedFitness
    solution_length: int
    dtype: Dtype = Dtype.FLOAT64
    initial_bounds: Optional[Bounds] = None
    num_workers: int = 1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "senses", parse_senses(self.senses))
        object.__setattr__(self, "dtype", Dtype.parse(self.dtype))
        if self.solution_length < 1:
            raise ConfigError("solution_length must be at least 1")
        if self.num_workers < 1:
            raise ConfigError("num_workers must be at least 1")
        if self.initial_bounds is not None:
            lo, hi = self.bounds_arrays()
            if not np.all(lo < hi):
                raise ConfigError(f"initial bounds need lo < hi, got ({self.initial_bounds})")
        elif self.dtype is not Dtype.BOOL:
            raise ConfigError(f"initial_bounds are required for dtype {self.dtype.value}")

    @property
    def num_objectives(self) -> int:
        return len(self.senses)

    @property
    def is_multi_objective(self) -> bool:
        return len(self.senses) > 1

    @property
    def sense(self) -> ObjectiveSense:
        return self.senses[0]

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.initial_bounds
        lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (self.solution_length,))
        hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (self.solution_length,))
        return lo, hi

    def with_workers(self, num_workers: int) -> "Problem":
        return Problem(
            self.senses,
            self.fitness,
            self.solution_length,
            self.dtype,
            self.initial_bounds,
            num_workers,
            self.name,
        )

    def generate_values(self, popsize: int, rng) -> np.ndarray:
        if popsize < 1:
            raise ConfigError("popsize must be at least 1")
        gen = _as_generator(rng)
        shape = (popsize, self.solution_length)
        if self.dtype is Dtype.BOOL:
            return gen.integers(0, 2, size=shape).astype(bool)
        lo, hi = self.bounds_arrays()
        if self.dtype is Dtype.INT64:
            lo_i = np.ceil(lo).astype(np.int64)
            hi_i = np.floor(hi).astype(np.int64)
            return gen.integers(lo_i, hi_i, size=shape, endpoint=True, dtype=np.int64)
        values = gen.uniform(lo, hi, size=shape)
        return values.astype(self.dtype.numpy, copy=False)

    def generate_batch(self, popsize: int, rng: Union[RngStream, np.random.Generator]) -> SolutionBatch:
        """A fresh, unevaluated population drawn uniformly within the initial bounds."""
        values = self.generate_values(popsize, rng)
        return SolutionBatch(values, num_objectives=self.num_objectives)

    def evaluate_values(self, values: np.ndarray) -> np.ndarray:
        """Evaluate a raw decision matrix; returns a float64 (rows, m) matrix."""
        values = np.asarray(values)
        rows = values.shape[0]
        if rows == 0:
            return np.empty((0, self.num_objectives), dtype=np.float64)
        workers = min(self.num_workers, rows)
        if workers == 1:
            return self._call(values)
        chunk = math.ceil(rows / workers)
        pieces = [values[i : i + chunk] for i in range(0, rows, chunk)]
        with ThreadPoolExecutor(max_workers=len(pieces)) as pool:
            results = list(pool.map(self._call, pieces))
        return np.concatenate(results, axis=0)

    def _call(self, values: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fitness(values), dtype=np.float64)
        if out.ndim == 1:
            out = out.reshape(-1, 1)
        expected = (values.shape[0], self.num_objectives)
        if out.shape != expected:
            raise ShapeError(f"fitness returned shape {out.shape}, expected {expected}")
        return out

    def evaluate(self, batch: SolutionBatch) -> int:
        """
        Fill `batch.evals` in place and mark every row evaluated.

        Returns the number of rows holding a non-finite evaluation; such
        values are stored as-is.
        """
        if batch.solution_length != self.solution_length:
            raise ShapeError(f"batch has {batch.solution_length} columns, problem expects {self.solution_length}")
        if batch.values.dtype != self.dtype.numpy:
            raise ShapeError(f"batch dtype {batch.values.dtype} does not match problem dtype {self.dtype.value}")
        if batch.num_objectives != self.num_objectives:
            raise ShapeError("batch objective count does not match the problem")
        if len(batch) == 0:
            return 0
        evals = self.evaluate_values(batch.values)
        batch.set_evals(evals)
        return int(np.count_nonzero(~np.isfinite(evals).all(axis=1)))


def sphere_problem(dim: int, bounds=(-10.0, 10.0), num_workers: int = 1) -> Problem:
    return Problem("min", eval_sphere, dim, Dtype.FLOAT64, bounds, num_workers, name="sphere")


def rastrigin_problem(dim: int, bounds=(-5.12, 5.12), num_workers: int = 1) -> Problem:
    return Problem("min", eval_rastrigin, dim, Dtype.FLOAT64, bounds, num_workers, name="rastrigin")


def kursawe_problem(bounds=(-5.0, 5.0), num_workers: int = 1) -> Problem:
    return Problem(("min", "min"), eval_kursawe, 3, Dtype.FLOAT64, bounds, num_workers, name="kursawe")
