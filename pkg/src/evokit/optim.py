"""
First-order steppers: Adam and ClipUp.

Both return a step *magnitude* for a given gradient and leave the sign
convention to the caller. An evolution strategy hands them an
improvement-direction gradient and adds the result; a plain gradient
descent subtracts it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, ShapeError

__all__ = ["Adam", "ClipUp", "adam_step", "clipup_step", "make_optimizer"]


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray = None
    v: np.ndarray = None
    t: int = 0

    def _check(self, grad: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if self.m is None:
            self.m = np.zeros_like(grad)
            self.v = np.zeros_like(grad)
        elif grad.shape != self.m.shape:
            raise ShapeError(f"gradient shape {grad.shape} does not match state {self.m.shape}")
        return grad

    def step(self, grad: np.ndarray) -> np.ndarray:
        grad = self._check(grad)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class ClipUp:
    """Normalized-gradient momentum with the velocity norm capped at `max_speed`."""

    step_size: float
    max_speed: float
    momentum: float = 0.9
    velocity: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.step_size <= 0 or self.max_speed <= 0:
            raise ConfigError("ClipUp step_size and max_speed must be positive")

    def step(self, grad: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if self.velocity is None:
            self.velocity = np.zeros_like(grad)
        elif grad.shape != self.velocity.shape:
            raise ShapeError(f"gradient shape {grad.shape} does not match state {self.velocity.shape}")
        velocity = self.momentum * self.velocity
        direction = _unit(grad)
        if direction is not None:
            velocity = velocity + self.step_size * direction
        self.velocity = _clip_norm(velocity, self.max_speed)
        return self.velocity.copy()


def _unit(x: np.ndarray):
    """`x / ||x||`, or None for the zero vector. Pre-scales by a power of two to dodge overflow."""
    peak = np.max(np.abs(x)) if x.size else 0.0
    if peak == 0 or not np.isfinite(peak):
        return None
    _, exponent = np.frexp(peak)
    scaled = np.ldexp(x, -int(exponent))
    return scaled / np.linalg.norm(scaled)


def _clip_norm(x: np.ndarray, max_norm: float) -> np.ndarray:
    norm = np.linalg.norm(x)
    if norm <= max_norm:
        return x
    x = x * (max_norm / norm)
    # rounding can leave the norm an ulp above the cap
    while np.linalg.norm(x) > max_norm:
        x = x * (1.0 - 2.0**-52)
    return x


def adam_step(state: Adam, grad: np.ndarray) -> np.ndarray:
    return state.step(grad)


def clipup_step(state: ClipUp, grad: np.ndarray) -> np.ndarray:
    return state.step(grad)


def make_optimizer(name: str, **config):
    name = name.lower()
    if name == "adam":
        return Adam(**config)
    if name == "clipup":
        return ClipUp(**config)
    raise ConfigError(f"unknown optimizer {name!r}")
