"""
Population storage, dtypes, objective senses and seeded random streams.

A `SolutionBatch` keeps the decision values of a population in one
contiguous 2-D array (one row per solution) next to a float64 evaluation
matrix and per-row "evaluated" flags. Slicing and concatenation always
copy, so batches handed to worker threads never alias each other.
"""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "ConfigError",
    "ContractError",
    "Dtype",
    "ObjectiveSense",
    "RngStream",
    "ShapeError",
    "SolutionBatch",
    "StateError",
    "argsort_fitness",
    "concat",
    "parse_senses",
]


class ConfigError(ValueError):
    """Invalid configuration value (bounds, population size, ratios...)."""


class ShapeError(ValueError):
    """Array shapes or dtypes do not line up."""


class ContractError(ValueError):
    """An input violates an operation's precondition."""


class StateError(RuntimeError):
    """Operation requires a state the object is not in (e.g. unevaluated rows)."""


class Dtype(enum.Enum):
    FLOAT32 = "float32"
    FLOAT64 = "float64"
    INT64 = "int64"
    BOOL = "bool"

    @property
    def numpy(self) -> np.dtype:
        return np.dtype(self.value)

    @property
    def is_float(self) -> bool:
        return self in (Dtype.FLOAT32, Dtype.FLOAT64)

    @classmethod
    def parse(cls, value: Union["Dtype", str, np.dtype, type]) -> "Dtype":
        if isinstance(value, Dtype):
            return value
        return cls(np.dtype(value).name)


class ObjectiveSense(enum.Enum):
    MIN = "min"
    MAX = "max"

    @classmethod
    def parse(cls, value: Union["ObjectiveSense", str]) -> "ObjectiveSense":
        if isinstance(value, ObjectiveSense):
            return value
        return cls(str(value).lower())

    def better(self, a, b):
        """Elementwise strict improvement of `a` over `b` under this sense."""
        return a < b if self is ObjectiveSense.MIN else a > b


def parse_senses(senses) -> tuple[ObjectiveSense, ...]:
    if isinstance(senses, (str, ObjectiveSense)):
        senses = [senses]
    parsed = tuple(ObjectiveSense.parse(s) for s in senses)
    if not parsed:
        raise ConfigError("at least one objective sense is required")
    return parsed


def _label_to_int(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("stream labels must be non-negative")
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """
    Counter-based random stream keyed by `(seed, stream)`.

    The generator is Philox with a 128-bit key built from the two 64-bit
    integers, so identical keys give identical draws on any machine and
    different stream ids give independent sequences. `derive` produces
    child streams (per generation, per worker, ...) without consuming
    draws from the parent.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed | (self.stream << 64)))

    def derive(self, *labels) -> "RngStream":
        entropy = [self.stream, *(_label_to_int(lb) for lb in labels)]
        state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
        return RngStream(self.seed, int(state[0]))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass
class SolutionBatch:
    """
    A population: decision values, evaluations and evaluated flags.

    `values` has shape (rows, solution_length); `evals` is always float64
    with shape (rows, num_objectives).
    """

    values: np.ndarray
    evals: np.ndarray = None
    evaluated: np.ndarray = None
    num_objectives: int = field(default=1)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values)
        if values.ndim != 2 or values.shape[1] < 1:
            raise ShapeError(f"values must be a (rows, cols>=1) matrix, got shape {values.shape}")
        rows = values.shape[0]
        if self.evals is None:
            evals = np.full((rows, self.num_objectives), np.nan, dtype=np.float64)
        else:
            evals = np.ascontiguousarray(self.evals, dtype=np.float64)
            if evals.ndim == 1:
                evals = evals.reshape(-1, 1)
        if evals.shape[0] != rows or evals.shape[1] < 1:
            raise ShapeError(f"evals shape {evals.shape} does not match {rows} rows")
        if self.evaluated is None:
            evaluated = np.zeros(rows, dtype=bool) if self.evals is None else np.ones(rows, dtype=bool)
        else:
            evaluated = np.array(self.evaluated, dtype=bool).reshape(rows)
        self.values = values
        self.evals = evals
        self.evaluated = evaluated
        self.num_objectives = evals.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def solution_length(self) -> int:
        return self.values.shape[1]

    @property
    def dtype(self) -> Dtype:
        return Dtype.parse(self.values.dtype)

    @property
    def is_evaluated(self) -> bool:
        return bool(self.evaluated.all())

    def set_evals(self, evals: np.ndarray) -> None:
        evals = np.asarray(evals, dtype=np.float64)
        if evals.ndim == 1:
            evals = evals.reshape(-1, 1)
        if evals.shape != self.evals.shape:
            raise ShapeError(f"expected evals of shape {self.evals.shape}, got {evals.shape}")
        self.evals[...] = evals
        self.evaluated[...] = True

    def copy(self) -> "SolutionBatch":
        return SolutionBatch(self.values.copy(), self.evals.copy(), self.evaluated.copy())

    def slice(self, start: int, end: int) -> "SolutionBatch":
        rows = len(self)
        if not (0 <= start <= end <= rows):
            raise IndexError(f"slice [{start}, {end}) out of range for {rows} rows")
        return SolutionBatch(
            self.values[start:end].copy(),
            self.evals[start:end].copy(),
            self.evaluated[start:end].copy(),
        )

    def take(self, indices: Sequence[int]) -> "SolutionBatch":
        indices = np.asarray(indices, dtype=np.intp)
        return SolutionBatch(self.values[indices], self.evals[indices], self.evaluated[indices])

    def _require_evaluated(self):
        if not self.is_evaluated:
            raise StateError("all rows must be evaluated")

    def argsort_by_objective(self, obj: int = 0, sense: ObjectiveSense = ObjectiveSense.MIN) -> np.ndarray:
        """Row indices best-first under `sense`; ties keep the lower index first."""
        self._require_evaluated()
        if not (0 <= obj < self.num_objectives):
            raise IndexError(f"objective index {obj} out of range")
        return argsort_fitness(self.evals[:, obj], sense)

    def take_best(self, k: int, sense: ObjectiveSense = ObjectiveSense.MIN) -> "SolutionBatch":
        if self.num_objectives != 1:
            raise ContractError("take_best needs a single-objective batch; use pareto_order instead")
        if k > len(self):
            raise IndexError(f"cannot take {k} rows from a batch of {len(self)}")
        order = self.argsort_by_objective(0, ObjectiveSense.parse(sense))
        return self.take(order[:k])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SolutionBatch):
            return NotImplemented
        return (
            self.values.dtype == other.values.dtype
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.evals, other.evals, equal_nan=True)
            and np.array_equal(self.evaluated, other.evaluated)
        )


def argsort_fitness(fitnesses: np.ndarray, sense: ObjectiveSense = ObjectiveSense.MIN) -> np.ndarray:
    """Stable best-first ordering of a fitness vector."""
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    if ObjectiveSense.parse(sense) is ObjectiveSense.MIN:
        return np.argsort(fitnesses, kind="stable")
    # negating keeps the sort stable for ties, unlike reversing an ascending sort
    return np.argsort(-fitnesses, kind="stable")


def concat(*batches: SolutionBatch) -> SolutionBatch:
    """Stack batches row-wise, first argument's rows first."""
    if not batches:
        raise ValueError("need at least one batch")
    first = batches[0]
    for b in batches[1:]:
        if b.solution_length != first.solution_length:
            raise ShapeError("solution lengths differ")
        if b.values.dtype != first.values.dtype:
            raise ShapeError(f"dtypes differ: {first.values.dtype} vs {b.values.dtype}")
        if b.num_objectives != first.num_objectives:
            raise ShapeError("objective counts differ")
    return SolutionBatch(
        np.concatenate([b.values for b in batches], axis=0),
        np.concatenate([b.evals for b in batches], axis=0),
        np.concatenate([b.evaluated for b in batches], axis=0),
    )


def empty_like(batch: SolutionBatch) -> SolutionBatch:
    return batch.slice(0, 0)
