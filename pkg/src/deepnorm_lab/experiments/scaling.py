"""Logarithmic depth scaling fits ``L(d) = A log(d) + B``."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from deepnorm_lab.runtime.errors import FitError

SCHEMA_VERSION = 1


@dataclass(frozen=True, slots=True)
class ScalingFit:
    a: float
    b: float
    residual: float
    points: int

    def predict(self, depth: float) -> float:
        return self.a * math.log(depth) + self.b

    def to_dict(self) -> dict[str, Any]:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}


def _design(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    if len(points) < 2:
        raise FitError(f"need at least 2 points, got {len(points)}")
    data = np.asarray(points, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError("points must be (depth, score) pairs")
    depths, scores = data[:, 0], data[:, 1]
    if not (np.all(np.isfinite(data)) and np.all(depths > 0)):
        raise FitError("depths must be > 0 and every value finite")
    if np.unique(depths).size < 2:
        raise FitError("need at least 2 distinct depths")
    return np.log(depths), scores


def fit_log_scaling(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares fit of score against ``log(depth)`` with RMS residual.

    Points are sorted first, so any ordering of the same points gives the same fit.

    Raises:
        FitError: With fewer than two distinct positive depths.
    """
    x, y = _design(sorted((float(d), float(score)) for d, score in points))
    design = np.column_stack([x, np.ones_like(x)])
    (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ np.array([a, b]) - y) ** 2)))
    return ScalingFit(a=float(a), b=float(b), residual=residual, points=len(x))


def normal_equations_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """``(A, B)`` from the closed-form 2x2 normal equations."""
    x, y = _design(list(points))
    n = float(x.size)
    sx, sy = math.fsum(x), math.fsum(y)
    sxx = math.fsum(x * x)
    sxy = math.fsum(x * y)
    det = n * sxx - sx * sx
    a = (n * sxy - sx * sy) / det
    b = (sy - a * sx) / n
    return a, b
