"""
Pareto dominance, non-dominated sorting and crowding distance.

The sort is the dominance-count / dominated-set procedure of NSGA-II,
expressed with a boolean dominance matrix so that each peeling round is a
handful of array operations instead of nested Python loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ObjectiveSense, ShapeError, parse_senses

__all__ = [
    "ParetoFronts",
    "crowding_distance",
    "dominance_matrix",
    "dominates",
    "hypervolume_2d",
    "non_dominated_sort",
    "pareto_order",
]


def _to_min_form(evals: np.ndarray, senses) -> np.ndarray:
    """Flip maximized columns so that smaller is always better."""
    evals = np.asarray(evals, dtype=np.float64)
    if evals.ndim == 1:
        evals = evals.reshape(-1, 1)
    senses = parse_senses(senses)
    if evals.shape[1] != len(senses):
        raise ShapeError(f"{evals.shape[1]} objective columns but {len(senses)} senses")
    signs = np.array([1.0 if s is ObjectiveSense.MIN else -1.0 for s in senses])
    return evals * signs


def dominates(a, b, senses) -> bool:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    senses = parse_senses(senses)
    if a.shape != b.shape or a.shape[0] != len(senses):
        raise ShapeError("evaluation rows and senses must have equal lengths")
    pair = _to_min_form(np.stack([a, b]), senses)
    return bool(np.all(pair[0] <= pair[1]) and np.any(pair[0] < pair[1]))


def dominance_matrix(evals: np.ndarray, senses) -> np.ndarray:
    """`D[i, j]` is True when row i dominates row j."""
    f = _to_min_form(evals, senses)
    rows = f.shape[0]
    no_worse = np.ones((rows, rows), dtype=bool)
    better = np.zeros((rows, rows), dtype=bool)
    # one 2-D comparison per objective; avoids a (rows, rows, m) temporary
    for col in f.T:
        no_worse &= col[:, None] <= col[None, :]
        better |= col[:, None] < col[None, :]
    return no_worse & better


@dataclass
class ParetoFronts:
    fronts: list[np.ndarray]
    crowding: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        """Front index of every row."""
        ranks = np.empty(self.crowding.shape[0], dtype=np.int64)
        for k, front in enumerate(self.fronts):
            ranks[front] = k
        return ranks


def non_dominated_sort(evals: np.ndarray, senses) -> ParetoFronts:
    f = _to_min_form(evals, senses)
    rows = f.shape[0]
    if rows == 0:
        return ParetoFronts([], np.empty(0, dtype=np.float64))
    dom = dominance_matrix(f, ["min"] * f.shape[1])
    # number of rows dominating each row
    counts = dom.sum(axis=0).astype(np.int64)
    assigned = np.zeros(rows, dtype=bool)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current)
        assigned[current] = True
        counts -= dom[current].sum(axis=0)
        current = np.flatnonzero((counts == 0) & ~assigned)
    crowding = np.empty(rows, dtype=np.float64)
    for front in fronts:
        crowding[front] = crowding_distance(f[front], ["min"] * f.shape[1])
    return ParetoFronts(fronts, crowding)


def crowding_distance(front_evals: np.ndarray, senses) -> np.ndarray:
    f = _to_min_form(front_evals, senses)
    rows, m = f.shape
    distance = np.zeros(rows, dtype=np.float64)
    if rows <= 2:
        distance[:] = np.inf
        return distance
    for j in range(m):
        order = np.argsort(f[:, j], kind="stable")
        col = f[order, j]
        span = col[-1] - col[0]
        if span == 0:
            # every row is simultaneously minimal and maximal here, so no row
            # is singled out as a boundary and the objective adds nothing
            continue
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        distance[order[1:-1]] += (col[2:] - col[:-2]) / span
    return distance


def pareto_order(evals: np.ndarray, senses, fronts: ParetoFronts = None) -> np.ndarray:
    """Permutation: front index ascending, crowding descending, row index ascending."""
    if fronts is None:
        fronts = non_dominated_sort(evals, senses)
    rows = fronts.crowding.shape[0]
    # np.lexsort uses the last key as primary
    return np.lexsort((np.arange(rows), -fronts.crowding, fronts.ranks))


def hypervolume_2d(evals: np.ndarray, reference, senses=("min", "min")) -> float:
    """Area dominated by `evals` and bounded by `reference` (two objectives)."""
    f = _to_min_form(evals, senses)
    if f.shape[1] != 2:
        raise ShapeError("hypervolume_2d needs exactly two objectives")
    ref = _to_min_form(np.asarray(reference, dtype=np.float64).reshape(1, 2), senses)[0]
    f = f[np.all(f < ref, axis=1)]
    if f.shape[0] == 0:
        return 0.0
    f = f[np.lexsort((f[:, 1], f[:, 0]))]
    volume = 0.0
    best_f2 = ref[1]
    for f1, f2 in f:
        if f2 < best_f2:
            volume += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(volume)
