"""Closed-form model-update bounds over scalar models."""

from __future__ import annotations

import math
from collections.abc import Sequence

from deepnorm_lab.runtime.errors import DimensionError, InputError
from deepnorm_lab.theory.scalar import ScalarModel


def _terms(
    v: Sequence[float],
    w: Sequence[float],
    alpha: float,
    delta: Sequence[float],
) -> list[float]:
    if len(delta) != len(v):
        raise DimensionError(f"expected {len(v)} parameter deltas, got {len(delta)}")
    if any(d < 0 for d in delta):
        raise InputError("parameter deltas are norms and must be >= 0")
    return [
        math.sqrt(v_i * v_i + w_i * w_i) / alpha * d_i
        for v_i, w_i, d_i in zip(v, w, delta, strict=True)
    ]


def theorem1_terms(
    model: ScalarModel,
    delta_theta: Sequence[float],
    *,
    alpha_scale: float = 1.0,
) -> list[float]:
    """Per-sub-layer terms ``sqrt(v_i^2 + w_i^2) / alpha * ||dtheta_i||`` of a single stack.

    Encoder-only and encoder-decoder models use the 2N encoder sub-layers;
    decoder-only models use the 2M decoder sub-layers.
    """
    if model.arch.has_encoder:
        return _terms(model.v_enc, model.w_enc, model.alpha_enc * alpha_scale, delta_theta)
    return _terms(model.v_dec, model.w_dec, model.alpha_dec * alpha_scale, delta_theta)


def theorem1_bound(
    model: ScalarModel,
    delta_theta: Sequence[float],
    *,
    alpha_scale: float = 1.0,
) -> float:
    return math.fsum(theorem1_terms(model, delta_theta, alpha_scale=alpha_scale))


def theorem2_terms(
    model: ScalarModel,
    delta_theta_e: Sequence[float],
    delta_theta_d: Sequence[float],
    *,
    alpha_scale: float = 1.0,
) -> tuple[float, float]:
    """``(encoder term, decoder term)`` of the encoder-decoder update bound."""
    if model.arch.kind != "encoder_decoder":
        raise InputError(f"the two-term bound needs encoder_decoder, got {model.arch.kind}")
    alpha_e = model.alpha_enc * alpha_scale
    alpha_d = model.alpha_dec * alpha_scale
    encoder_sum = math.fsum(_terms(model.v_enc, model.w_enc, alpha_e, delta_theta_e))
    cross_weight = math.fsum(
        model.v_dec[j] * model.w_dec[j] / alpha_d for j in model.cross_indices()
    )
    decoder_sum = math.fsum(_terms(model.v_dec, model.w_dec, alpha_d, delta_theta_d))
    return cross_weight * encoder_sum, decoder_sum


def theorem2_bound(
    model: ScalarModel,
    delta_theta_e: Sequence[float],
    delta_theta_d: Sequence[float],
    *,
    alpha_scale: float = 1.0,
) -> float:
    first, second = theorem2_terms(
        model, delta_theta_e, delta_theta_d, alpha_scale=alpha_scale
    )
    return first + second


def postln_bound_per_delta(layers: int) -> float:
    """Single-stack Post-LN bound per unit delta: ``2L sqrt(2)``."""
    return 2.0 * layers * math.sqrt(2.0)


def deepnorm_bound_per_delta(layers: int) -> float:
    """Single-stack DeepNorm bound per unit delta: ``2L sqrt(2 beta^2) / alpha = sqrt(2L)``."""
    return math.sqrt(2.0 * layers)
