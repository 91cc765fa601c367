"""Vectorized evolutionary computation on numpy arrays."""

from .core import (
    ConfigError,
    ContractError,
    Dtype,
    ObjectiveSense,
    RngStream,
    ShapeError,
    SolutionBatch,
    StateError,
    concat,
)
from .es import CEM, PGPE, SNES, EsState, RankingMethod, SeparableGaussian
from .ga import GeneticAlgorithm, TwoPointCrossOver
from .optim import Adam, ClipUp
from .problem import Problem, eval_kursawe, eval_rastrigin, eval_sphere, vectorized

__version__ = "0.1.0"
