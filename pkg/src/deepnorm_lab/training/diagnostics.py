"""Post-hoc instability diagnostics over recorded traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from deepnorm_lab.runtime.errors import InputError
from deepnorm_lab.training.trace import RunTrace

VANISHED_RATIO = 0.01


@dataclass(frozen=True, slots=True)
class VanishingBucket:
    sublayer: str
    early: float
    late: float
    ratio: float
    vanished: bool


@dataclass(frozen=True, slots=True)
class VanishingReport:
    buckets: list[VanishingBucket]

    @property
    def flagged(self) -> list[str]:
        return [bucket.sublayer for bucket in self.buckets if bucket.vanished]

    def to_dict(self) -> dict[str, dict[str, float | bool]]:
        return {
            bucket.sublayer: {
                "early": bucket.early,
                "late": bucket.late,
                "ratio": bucket.ratio,
                "vanished": bucket.vanished,
            }
            for bucket in self.buckets
        }


def _stage_mean(values: list[float]) -> float:
    finite = [value for value in values if math.isfinite(value)]
    return float(np.mean(finite)) if finite else math.nan


def detect_gradient_vanishing(
    trace: RunTrace,
    *,
    threshold: float = VANISHED_RATIO,
    stage_fraction: float = 0.25,
) -> VanishingReport:
    """Late-to-early gradient-norm ratio per sub-layer.

    Early and late stages are the first and last ``stage_fraction`` of the
    records (at least one each). Ratios below ``threshold`` are flagged.

    Raises:
        InputError: If the trace has fewer than two records.
    """
    if len(trace.records) < 2:
        raise InputError(f"need at least 2 trace records, got {len(trace.records)}")
    width = max(1, int(len(trace.records) * stage_fraction))
    buckets = []
    for name in trace.sublayers:
        series = trace.grad_series(name)
        early = _stage_mean(series[:width])
        late = _stage_mean(series[-width:])
        if early > 0.0:
            ratio = late / early
        elif late > 0.0:
            ratio = math.inf
        else:
            ratio = 1.0
        buckets.append(
            VanishingBucket(
                sublayer=name,
                early=early,
                late=late,
                ratio=ratio,
                vanished=math.isfinite(ratio) and ratio < threshold,
            )
        )
    return VanishingReport(buckets=buckets)


def ln_input_growth(trace: RunTrace, d_model: int | None = None) -> dict[str, float]:
    """Largest ``||x|| / sqrt(d)`` seen at LN inputs, split into FFN and attention paths."""
    width = d_model or trace.d_model
    if width < 1:
        raise InputError(f"d_model must be >= 1, got {width}")
    scale = math.sqrt(width)
    growth = {"ffn": 0.0, "attention": 0.0}
    for name in trace.ln_columns():
        path = "ffn" if name.endswith("_ffn") else "attention"
        peaks = [value for value in trace.ln_series(name) if math.isfinite(value)]
        if peaks:
            growth[path] = max(growth[path], max(peaks) / scale)
    return growth


def top_layer_grad_norms(trace: RunTrace, component: str = "decoder") -> dict[str, list[float]]:
    """Gradient-norm series of every sub-layer in the highest layer of ``component``."""
    layers = [
        int(name.split("_")[1]) for name in trace.sublayers if name.startswith(f"{component}_")
    ]
    if not layers:
        raise InputError(f"trace has no {component} sub-layers")
    top = max(layers)
    prefix = f"{component}_{top}_"
    return {
        name: trace.grad_series(name) for name in trace.sublayers if name.startswith(prefix)
    }
