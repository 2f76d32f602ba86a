"""Differentiable primitives over :class:`Tensor`.

Each primitive computes its forward value with numpy and records a closure that
maps the upstream gradient to one gradient per parent (``None`` for parents
that never need one).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from deepnorm_lab.autodiff.tensor import Tensor, make_result
from deepnorm_lab.runtime.errors import DimensionError, InputError

DEFAULT_LN_EPS = 1e-5


def as_tensor(value: Tensor | float | np.ndarray) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from exc


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "add")

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result("add", a.data + b.data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "sub")

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result("sub", a.data - b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "mul")

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result("mul", a.data * b.data, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * factor,)

    return make_result("scale", a.data * factor, (a,), backward)


def mask_mul(a: Tensor, mask: np.ndarray) -> Tensor:
    """Multiply by a constant array (dropout masks, zeroing)."""

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (_unbroadcast(g * mask, a.shape),)

    return make_result("mask_mul", a.data * mask, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes; leading axes broadcast."""
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise DimensionError(f"matmul needs >=2-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul inner dimensions differ: {a.shape} x {b.shape}")

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grad_a = np.matmul(g, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return make_result("matmul", np.matmul(a.data, b.data), (a, b), backward)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    original = a.shape

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g.reshape(original),)

    return make_result("reshape", a.data.reshape(tuple(shape)), (a,), backward)


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.transpose(g, inverse),)

    return make_result("transpose", np.transpose(a.data, axes), (a,), backward)


def relu(a: Tensor) -> Tensor:
    positive = a.data > 0

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * positive,)

    return make_result("relu", np.where(positive, a.data, 0.0), (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.full(a.shape, g.reshape(-1)[0]),)

    return make_result("sum", np.array([a.data.sum()]), (a,), backward)


def mean_all(a: Tensor) -> Tensor:
    count = a.size

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.full(a.shape, g.reshape(-1)[0] / count),)

    return make_result("mean", np.array([a.data.mean()]), (a,), backward)


def softmax_rows(x: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Softmax over the last axis with per-row max subtraction.

    ``mask`` is a boolean array broadcastable to ``x``; ``True`` entries are set
    to ``-inf`` before normalization and receive zero gradient.
    """
    logits = x.data if mask is None else np.where(mask, -np.inf, x.data)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        inner = (g * probs).sum(axis=-1, keepdims=True)
        return (probs * (g - inner),)

    return make_result("softmax_rows", probs, (x,), backward)


def layer_norm(
    x: Tensor,
    eps: float = DEFAULT_LN_EPS,
    *,
    gain: Tensor | None = None,
    bias: Tensor | None = None,
) -> Tensor:
    """Normalize each last-axis vector to mean 0 and population variance 1.

    ``gain``/``bias`` are the optional learned affine parameters of shape ``(d,)``.
    """
    d = x.shape[-1]
    if d < 2:
        raise DimensionError(f"layer_norm needs a last axis of at least 2, got {d}")
    if eps <= 0:
        raise InputError(f"layer_norm eps must be > 0, got {eps}")

    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    variance = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(variance + eps)
    normed = centered * inv_std

    out = normed
    if gain is not None:
        out = out * gain.data
    if bias is not None:
        out = out + bias.data

    parents: tuple[Tensor, ...] = (x,)
    if gain is not None:
        parents += (gain,)
    if bias is not None:
        parents += (bias,)

    def backward(g: np.ndarray) -> list[np.ndarray]:
        g_normed = g * gain.data if gain is not None else g
        g_mean = g_normed.mean(axis=-1, keepdims=True)
        g_dot = (g_normed * normed).mean(axis=-1, keepdims=True)
        grads = [inv_std * (g_normed - g_mean - normed * g_dot)]
        if gain is not None:
            grads.append((g * normed).reshape(-1, d).sum(axis=0))
        if bias is not None:
            grads.append(g.reshape(-1, d).sum(axis=0))
        return grads

    return make_result("layer_norm", out, parents, backward)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of ``table`` by integer ``ids``."""
    ids = np.asarray(ids, dtype=np.int64)
    vocab = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        raise InputError(
            f"token ids must lie in [0, {vocab}), got range [{ids.min()}, {ids.max()}]"
        )

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros_like(table.data)
        np.add.at(grad, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        return (grad,)

    return make_result("embedding", table.data[ids], (table,), backward)


def cross_entropy(
    logits: Tensor,
    targets: np.ndarray,
    *,
    label_smoothing: float = 0.0,
) -> Tensor:
    """Mean token-level cross entropy over the last axis."""
    targets = np.asarray(targets, dtype=np.int64)
    vocab = logits.shape[-1]
    if logits.shape[:-1] != targets.shape:
        raise DimensionError(f"logits {logits.shape} do not match targets {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise InputError(f"targets must lie in [0, {vocab})")

    flat = logits.data.reshape(-1, vocab)
    shifted = flat - flat.max(axis=-1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    target_dist = np.full_like(flat, label_smoothing / vocab)
    target_dist[np.arange(flat.shape[0]), targets.reshape(-1)] += 1.0 - label_smoothing
    count = flat.shape[0]
    loss = -(target_dist * log_probs).sum() / count

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        grad = (np.exp(log_probs) - target_dist) * (g.reshape(-1)[0] / count)
        return (grad.reshape(logits.shape),)

    return make_result("cross_entropy", np.array([loss]), (logits,), backward)


def slice_axis(a: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """``a[..., start:stop, ...]`` along ``axis``; the gradient is zero-padded back."""
    extent = a.shape[axis]
    if not 0 <= start <= stop <= extent:
        raise DimensionError(f"slice [{start}:{stop}] outside axis {axis} of length {extent}")
    index = [slice(None)] * a.data.ndim
    index[axis] = slice(start, stop)
    window = tuple(index)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros_like(a.data)
        grad[window] = g
        return (grad,)

    return make_result("slice_axis", a.data[window], (a,), backward)
