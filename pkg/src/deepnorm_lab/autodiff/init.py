"""Weight initializers."""

from __future__ import annotations

import math

import numpy as np

from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.runtime.errors import InputError


def xavier_std(fan_in: int, fan_out: int, gain: float = 1.0) -> float:
    """Standard deviation of Xavier-normal: ``gain * sqrt(2 / (fan_in + fan_out))``."""
    return gain * math.sqrt(2.0 / (fan_in + fan_out))


def xavier_normal(
    fan_in: int,
    fan_out: int,
    gain: float,
    rng: np.random.Generator,
    *,
    name: str | None = None,
) -> Tensor:
    """I.i.d. ``N(0, xavier_std**2)`` matrix of shape ``(fan_in, fan_out)``."""
    if fan_in < 1 or fan_out < 1:
        raise InputError(f"fan_in/fan_out must be >= 1, got {fan_in}/{fan_out}")
    if gain < 0:
        raise InputError(f"gain must be >= 0, got {gain}")
    std = xavier_std(fan_in, fan_out, gain)
    data = rng.standard_normal((fan_in, fan_out)) * std
    return Tensor(data, requires_grad=True, name=name)


def zeros(shape: tuple[int, ...], *, name: str | None = None) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True, name=name)


def ones(shape: tuple[int, ...], *, name: str | None = None) -> Tensor:
    return Tensor(np.ones(shape), requires_grad=True, name=name)
