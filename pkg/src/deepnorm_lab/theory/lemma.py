"""Convex-combination property of softmax attention over normalized rows."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.runtime.errors import DimensionError

LEMMA_SLACK = 1e-9


@dataclass(frozen=True, slots=True)
class LemmaCheck:
    lhs: float
    rhs: float
    holds: bool


def softmax(q: np.ndarray) -> np.ndarray:
    shifted = q - q.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def normalize_rows(x: np.ndarray) -> np.ndarray:
    """Rows rescaled to mean 0 and population variance 1."""
    centered = x - x.mean(axis=-1, keepdims=True)
    return centered / centered.std(axis=-1, keepdims=True)


def lemma1_check(x: Tensor | np.ndarray, q: Sequence[float] | np.ndarray) -> LemmaCheck:
    """``lhs = ||softmax(q) X||`` against ``rhs = max_i ||x_i||``."""
    rows = x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
    scores = np.asarray(q, dtype=np.float64)
    if rows.ndim != 2 or scores.shape != (rows.shape[0],):
        raise DimensionError(
            f"need X of shape (n, d) and q of shape (n,), got {rows.shape} and {scores.shape}"
        )
    lhs = float(np.linalg.norm(softmax(scores) @ rows))
    rhs = float(np.linalg.norm(rows, axis=1).max())
    return LemmaCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs + LEMMA_SLACK)
