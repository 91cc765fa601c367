"""
Lockstep stack-machine interpreter for linear genetic programs.

A program is a row of integer opcodes. The interpreter runs every program
on every input case at once: step t executes symbol t of each program on
its own stack, so the number of batch steps equals the program length no
matter how large the population is.
"""

from __future__ import annotations

import enum
from typing import Callable, Optional

import numpy as np

from .core import ContractError, Dtype, ShapeError
from .problem import Problem
from .structures import BatchedStack

__all__ = [
    "Opcode",
    "default_cases",
    "gp_fitness",
    "gp_interpret",
    "gp_problem",
    "opcode_mutation",
    "target_quadratic",
]

PROTECTED_DIV_EPS = 1e-9


class Opcode(enum.IntEnum):
    PAD = 0
    PUSH_X = 1
    PUSH_1 = 2
    ADD = 3
    SUB = 4
    MUL = 5
    DIV = 6


NUM_OPCODES = len(Opcode)


def validate_programs(programs) -> np.ndarray:
    programs = np.asarray(programs)
    if programs.ndim != 2:
        raise ShapeError(f"programs must be a 2-D matrix, got shape {programs.shape}")
    if not np.issubdtype(programs.dtype, np.integer):
        if not np.all(np.mod(programs, 1) == 0):
            raise ContractError("opcodes must be integers")
        programs = programs.astype(np.int64)
    if programs.size and (programs.min() < 0 or programs.max() >= NUM_OPCODES):
        bad = programs[(programs < 0) | (programs >= NUM_OPCODES)][0]
        raise ContractError(f"invalid opcode {bad}")
    return programs.astype(np.int64, copy=False)


def gp_interpret(
    programs,
    inputs,
    step_hook: Optional[Callable[[int], None]] = None,
) -> np.ndarray:
    """
    Run every program on every input value.

    Binary operators pop the right operand first, then the left one, and
    push `left op right`. A binary operator on a stack with fewer than two
    elements is skipped. Division by a number smaller than 1e-9 in
    magnitude yields 1.0. A program's output is the top of its stack, or
    0.0 if the stack is empty.

    Returns a (num_programs, num_cases) float64 matrix.
    """
    programs = validate_programs(programs)
    inputs = np.asarray(inputs, dtype=np.float64).ravel()
    pop, length = programs.shape
    cases = inputs.shape[0]
    stacks = BatchedStack(pop * cases, max(length, 1))
    x = np.tile(inputs, pop)
    ones = np.ones(pop * cases)

    for t in range(length):
        op = np.repeat(programs[:, t], cases)
        stacks.push_(x, where=op == Opcode.PUSH_X)
        stacks.push_(ones, where=op == Opcode.PUSH_1)
        binary = (op >= Opcode.ADD) & (stacks.lengths >= 2)
        if binary.any():
            right, _ = stacks.pop_(binary)
            left, _ = stacks.pop_(binary)
            with np.errstate(all="ignore"):
                safe_den = np.where(np.abs(right) < PROTECTED_DIV_EPS, 1.0, right)
                result = np.select(
                    [op == Opcode.ADD, op == Opcode.SUB, op == Opcode.MUL],
                    [left + right, left - right, left * right],
                    default=np.where(np.abs(right) < PROTECTED_DIV_EPS, 1.0, left / safe_den),
                )
            stacks.push_(result, where=binary)
        if step_hook is not None:
            step_hook(t)

    out, _ = stacks.top()
    return out.reshape(pop, cases)


def target_quadratic(x):
    return x * x + x + 1.0


def default_cases(n: int = 16) -> np.ndarray:
    return np.linspace(-2.0, 2.0, n)


def gp_fitness(programs, target: Callable = target_quadratic, cases=None) -> np.ndarray:
    """Mean squared error of each program against `target` over the cases; shape (rows, 1)."""
    cases = default_cases() if cases is None else np.asarray(cases, dtype=np.float64).ravel()
    if cases.shape[0] < 1:
        raise ContractError("at least one fitness case is required")
    outputs = gp_interpret(programs, cases)
    expected = np.asarray(target(cases), dtype=np.float64)
    with np.errstate(all="ignore"):
        err = np.mean((outputs - expected) ** 2, axis=1)
    return err.reshape(-1, 1)


def gp_problem(max_length: int = 20, target: Callable = target_quadratic, cases=None, num_workers: int = 1) -> Problem:
    cases = default_cases() if cases is None else np.asarray(cases, dtype=np.float64)

    def fitness(programs):
        return gp_fitness(programs, target, cases)

    return Problem("min", fitness, max_length, Dtype.INT64, (0, NUM_OPCODES - 1), num_workers, name="gp")


def opcode_mutation(rate: Optional[float] = None):
    """Operator replacing each opcode by a uniformly random one with probability `rate` (default 1/length)."""

    def mutate(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        p = 1.0 / values.shape[1] if rate is None else rate
        hit = rng.random(values.shape) < p
        fresh = rng.integers(0, NUM_OPCODES, size=values.shape, dtype=values.dtype)
        return np.where(hit, fresh, values)

    return mutate
