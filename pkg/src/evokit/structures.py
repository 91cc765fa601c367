"""
Batches of bounded variable-length lists and stacks in contiguous storage.

Each container holds `batch_size` independent lists in a single
(batch_size, max_length) float64 matrix plus a length vector. All
operations take a boolean `where` mask and act only on the selected slots,
so a loop over many lists becomes a few array operations.
"""

from __future__ import annotations

import numpy as np

from .core import ShapeError

__all__ = ["BatchedList", "BatchedStack"]


class BatchedList:
    def __init__(self, batch_size: int, max_length: int):
        if batch_size < 0 or max_length < 1:
            raise ValueError("batch_size must be >= 0 and max_length >= 1")
        self.batch_size = batch_size
        self.max_length = max_length
        self.storage = np.zeros((batch_size, max_length), dtype=np.float64)
        self.lengths = np.zeros(batch_size, dtype=np.int64)
        self.overflowed = np.zeros(batch_size, dtype=bool)
        self._rows = np.arange(batch_size)

    def _mask(self, where) -> np.ndarray:
        if where is None:
            return np.ones(self.batch_size, dtype=bool)
        where = np.asarray(where, dtype=bool)
        if where.shape != (self.batch_size,):
            raise ShapeError(f"mask must have shape ({self.batch_size},), got {where.shape}")
        return where

    def _vector(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 0:
            return np.full(self.batch_size, float(values))
        if values.shape != (self.batch_size,):
            raise ShapeError(f"values must have shape ({self.batch_size},), got {values.shape}")
        return values

    def append_(self, values, where=None) -> None:
        """
        Append `values[i]` to list i wherever `where[i]` is set.

        A selected list that is already full is left unchanged and its
        `overflowed` flag is raised (and stays raised).
        """
        values = self._vector(values)
        mask = self._mask(where)
        full = self.lengths >= self.max_length
        write = mask & ~full
        rows = self._rows[write]
        self.storage[rows, self.lengths[write]] = values[write]
        self.lengths[write] += 1
        self.overflowed |= mask & full

    append_masked = append_

    def get(self, i: int) -> list[float]:
        return self.storage[i, : self.lengths[i]].tolist()

    def clear(self, where=None) -> None:
        mask = self._mask(where)
        self.lengths[mask] = 0
        self.overflowed[mask] = False

    def __len__(self) -> int:
        return self.batch_size


class BatchedStack(BatchedList):
    """LIFO view of `BatchedList`: push appends, pop removes the last element."""

    push_ = BatchedList.append_
    push_masked = BatchedList.append_

    def top(self, where=None) -> tuple[np.ndarray, np.ndarray]:
        """(values, valid): last element of every selected non-empty stack, 0.0 elsewhere."""
        mask = self._mask(where)
        valid = mask & (self.lengths > 0)
        out = np.zeros(self.batch_size, dtype=np.float64)
        rows = self._rows[valid]
        out[valid] = self.storage[rows, self.lengths[valid] - 1]
        return out, valid

    top_masked = top

    def pop_(self, where=None) -> tuple[np.ndarray, np.ndarray]:
        out, valid = self.top(where)
        self.lengths[valid] -= 1
        return out, valid

    pop_masked = pop_
