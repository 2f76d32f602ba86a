"""Sub-layer containers and multi-head attention / feed-forward blocks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from deepnorm_lab.autodiff import ops
from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.runtime.errors import DimensionError

SubLayerKind = Literal["self_attention", "cross_attention", "ffn"]
Component = Literal["encoder", "decoder"]

ATTENTION_WEIGHTS = ("W_Q", "W_K", "W_V", "W_O")
FFN_WEIGHTS = ("W_1", "W_2")
# Residual-branch weights that DeepNorm's beta and Post-LN-init's k_l rescale.
SCALED_WEIGHTS = frozenset({"W_V", "W_O", "W_1", "W_2"})


@dataclass(slots=True)
class SubLayer:
    """One attention or FFN block with its weights and optional LN affine params."""

    kind: SubLayerKind
    component: Component
    layer: int
    weights: dict[str, Tensor]
    ln_gain: Tensor | None = None
    ln_bias: Tensor | None = None
    extras: dict[str, Tensor] = field(default_factory=dict)

    @property
    def path(self) -> str:
        return {"self_attention": "self_attn", "cross_attention": "cross_attn", "ffn": "ffn"}[
            self.kind
        ]

    @property
    def name(self) -> str:
        return f"{self.component}_{self.layer}_{self.path}"

    def parameters(self) -> list[tuple[str, Tensor]]:
        params = [(f"{self.name}.{key}", tensor) for key, tensor in self.weights.items()]
        if self.ln_gain is not None:
            params.append((f"{self.name}.ln_gain", self.ln_gain))
        if self.ln_bias is not None:
            params.append((f"{self.name}.ln_bias", self.ln_bias))
        return params


def _as_batched(x: Tensor) -> tuple[Tensor, bool]:
    if x.data.ndim == 2:
        return ops.reshape(x, (1, *x.shape)), True
    if x.data.ndim == 3:
        return x, False
    raise DimensionError(f"attention expects (n, d) or (B, n, d) inputs, got {x.shape}")


def _split(x: Tensor, n_heads: int) -> Tensor:
    batch, length, d_model = x.shape
    heads = ops.reshape(x, (batch, length, n_heads, d_model // n_heads))
    return ops.transpose(heads, (0, 2, 1, 3))


def _merge(x: Tensor) -> Tensor:
    batch, n_heads, length, d_k = x.shape
    merged = ops.transpose(x, (0, 2, 1, 3))
    return ops.reshape(merged, (batch, length, n_heads * d_k))


def causal_mask(n_query: int, n_key: int) -> np.ndarray:
    """Boolean mask, ``True`` strictly above the diagonal."""
    return np.triu(np.ones((n_query, n_key), dtype=bool), k=1)


def attention_forward(
    x_q: Tensor,
    x_kv: Tensor,
    layer: SubLayer,
    causal: bool = False,
    *,
    n_heads: int = 1,
) -> Tensor:
    """``softmax(x_q W_Q (x_kv W_K)^T / sqrt(d_k)) x_kv W_V W_O`` per head, heads merged."""
    d_model = layer.weights["W_Q"].shape[0]
    if x_q.shape[-1] != d_model or x_kv.shape[-1] != d_model:
        raise DimensionError(
            f"attention inputs must end in d_model={d_model}, got {x_q.shape} and {x_kv.shape}"
        )
    if d_model % n_heads != 0:
        raise DimensionError(f"d_model {d_model} not divisible by {n_heads} heads")

    query, squeeze = _as_batched(x_q)
    memory, _ = _as_batched(x_kv)
    if query.shape[0] != memory.shape[0]:
        raise DimensionError(f"batch sizes differ: {query.shape[0]} vs {memory.shape[0]}")

    q = _split(ops.matmul(query, layer.weights["W_Q"]), n_heads)
    k = _split(ops.matmul(memory, layer.weights["W_K"]), n_heads)
    v = _split(ops.matmul(memory, layer.weights["W_V"]), n_heads)

    d_k = d_model // n_heads
    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(d_k))
    mask = causal_mask(query.shape[1], memory.shape[1]) if causal else None
    weights = ops.softmax_rows(scores, mask)
    out = ops.matmul(_merge(ops.matmul(weights, v)), layer.weights["W_O"])
    if squeeze:
        out = ops.reshape(out, out.shape[1:])
    return out


def ffn_forward(x: Tensor, layer: SubLayer) -> Tensor:
    """``relu(x W_1) W_2``."""
    return ops.matmul(ops.relu(ops.matmul(x, layer.weights["W_1"])), layer.weights["W_2"])


def head_views(layer: SubLayer, n_heads: int) -> list[dict[str, np.ndarray]]:
    """Per-head slices of the merged projections (column blocks of Q/K/V, row blocks of O)."""
    d_model = layer.weights["W_Q"].shape[0]
    d_k = d_model // n_heads
    views = []
    for head in range(n_heads):
        cols = slice(head * d_k, (head + 1) * d_k)
        views.append(
            {
                "W_Q": layer.weights["W_Q"].data[:, cols],
                "W_K": layer.weights["W_K"].data[:, cols],
                "W_V": layer.weights["W_V"].data[:, cols],
                "W_O": layer.weights["W_O"].data[cols, :],
            }
        )
    return views


def attention_row_bound(x_kv: np.ndarray, layer: SubLayer, n_heads: int) -> float:
    """Multi-head aggregate: the sum over heads of each head's largest ``W_V W_O`` row norm.

    Every attention output row is a sum of per-head convex combinations of these
    rows, so its norm cannot exceed this bound. With one head the sum collapses
    to the single-head maximum ``max_j ||x_j W_V W_O||``.
    """
    rows = np.asarray(x_kv).reshape(-1, x_kv.shape[-1])
    total = 0.0
    for view in head_views(layer, n_heads):
        projected = rows @ view["W_V"] @ view["W_O"]
        total += float(np.linalg.norm(projected, axis=-1).max())
    return total
