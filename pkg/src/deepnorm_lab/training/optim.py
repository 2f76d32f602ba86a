"""SGD and Adam over lists of tensors.

Both steps refuse to touch the parameters when any gradient is non-finite and
report that through their return value; the training loop records the run as
diverged instead of raising.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.config.models import OptimizerConfig


def _grads(params: Sequence[Tensor]) -> list[np.ndarray]:
    return [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]


def grads_finite(params: Sequence[Tensor]) -> bool:
    return all(p.grad is None or bool(np.all(np.isfinite(p.grad))) for p in params)


def global_grad_norm(params: Sequence[Tensor]) -> float:
    total = math.fsum(float(np.sum(g * g)) for g in _grads(params))
    return math.sqrt(total)


def clip_grad_norm(params: Sequence[Tensor], max_norm: float) -> float:
    """Rescale gradients in place to global norm <= ``max_norm``; returns the pre-clip norm."""
    norm = global_grad_norm(params)
    if math.isfinite(norm) and norm > max_norm:
        factor = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= factor
    return norm


def sgd_step(params: Sequence[Tensor], lr: float) -> bool:
    """``theta -= lr * grad``; returns ``False`` without updating on non-finite gradients."""
    if not grads_finite(params):
        return False
    for p, grad in zip(params, _grads(params), strict=True):
        p.data -= lr * grad
    return True


@dataclass(slots=True)
class AdamState:
    """First and second moments per parameter plus the update count."""

    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_params(cls, params: Sequence[Tensor]) -> AdamState:
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
        )


def adam_step(
    params: Sequence[Tensor],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.98,
    eps: float = 1e-8,
) -> bool:
    """Bias-corrected Adam; returns ``False`` and leaves state untouched on non-finite gradients."""
    if not grads_finite(params):
        return False
    if not state.m:
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]
    state.step += 1
    correction1 = 1.0 - beta1**state.step
    correction2 = 1.0 - beta2**state.step
    for index, (p, grad) in enumerate(zip(params, _grads(params), strict=True)):
        m = state.m[index]
        v = state.v[index]
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return True


class Optimizer(Protocol):
    def step(self, params: Sequence[Tensor], lr: float) -> bool: ...


class SGD:
    def step(self, params: Sequence[Tensor], lr: float) -> bool:
        return sgd_step(params, lr)


@dataclass(slots=True)
class Adam:
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-8
    state: AdamState = field(default_factory=AdamState)

    def step(self, params: Sequence[Tensor], lr: float) -> bool:
        return adam_step(params, self.state, lr, self.beta1, self.beta2, self.eps)


def build_optimizer(config: OptimizerConfig) -> Optimizer:
    if config.kind == "sgd":
        return SGD()
    return Adam(beta1=config.beta1, beta2=config.beta2, eps=config.eps)
