"""Finite-difference oracle and tape-based Jacobians."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from deepnorm_lab.autodiff.tensor import Tape, Tensor, no_grad
from deepnorm_lab.runtime.errors import InputError, OracleError

ScalarFn = Callable[[Tensor], Tensor | float]


def _scalar_value(result: Tensor | float) -> float:
    if isinstance(result, Tensor):
        return result.item()
    return float(result)


def finite_diff_grad(f: ScalarFn, x: Tensor, h: float = 1e-5) -> Tensor:
    """Central-difference gradient ``(f(x + h e_i) - f(x - h e_i)) / 2h``.

    ``x.data`` is perturbed in place and restored after each coordinate, so
    closures over model weights see the perturbation without rebuilding.
    """
    if h <= 0:
        raise InputError(f"finite-difference step must be > 0, got {h}")

    if not x.data.flags.c_contiguous:
        x.data = np.ascontiguousarray(x.data)
    grad = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    with no_grad():
        for index in range(flat.size):
            original = flat[index]
            flat[index] = original + h
            upper = _scalar_value(f(x))
            flat[index] = original - h
            lower = _scalar_value(f(x))
            flat[index] = original
            if not (np.isfinite(upper) and np.isfinite(lower)):
                raise OracleError(f"non-finite evaluation at coordinate {index}")
            grad.reshape(-1)[index] = (upper - lower) / (2.0 * h)
    return Tensor(grad)


def tape_grad(f: Callable[[Tensor], Tensor], x: Tensor) -> Tensor:
    """Gradient of scalar ``f`` at ``x`` by one reverse pass."""
    leaf = Tensor(x.data, requires_grad=True)
    with Tape() as tape:
        out = f(leaf)
    tape.backward(out)
    grad = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
    return Tensor(grad)


def jacobian(f: Callable[[Tensor], Tensor], x: Tensor) -> np.ndarray:
    """Full Jacobian ``d f(x) / d x`` with one backward pass per output coordinate."""
    leaf = Tensor(x.data, requires_grad=True)
    with Tape() as tape:
        out = f(leaf)
    rows = []
    for index in range(out.size):
        for node in tape.nodes:
            node.output.grad = None
        leaf.grad = None
        seed = np.zeros(out.size)
        seed[index] = 1.0
        tape.backward(out, seed.reshape(out.shape))
        grad = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
        rows.append(grad.reshape(-1).copy())
    return np.stack(rows)


@dataclass(frozen=True, slots=True)
class GradCheckResult:
    """Worst elementwise relative error between tape and oracle gradients."""

    max_rel_error: float
    checked: int
    skipped: int

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def compare_gradients(
    analytic: np.ndarray,
    numeric: np.ndarray,
    *,
    floor: float = 1e-8,
) -> GradCheckResult:
    """Elementwise ``|a - n| / max(|a|, |n|)``, skipping entries below ``floor``."""
    analytic = analytic.reshape(-1)
    numeric = numeric.reshape(-1)
    magnitude = np.maximum(np.abs(analytic), np.abs(numeric))
    keep = magnitude >= floor
    if not np.any(keep):
        return GradCheckResult(max_rel_error=0.0, checked=0, skipped=int(analytic.size))
    errors = np.abs(analytic[keep] - numeric[keep]) / magnitude[keep]
    return GradCheckResult(
        max_rel_error=float(errors.max()),
        checked=int(keep.sum()),
        skipped=int((~keep).sum()),
    )
