"""DeepNorm residual up-scale (alpha) and initialization gain (beta) per architecture.

Single-stack models (encoder-only or decoder-only, L layers) use
``alpha = (2L)^(1/4)`` and ``beta = (8L)^(-1/4)``, which makes
``2L * (2 beta^2) / alpha^2 == 1``. Encoder-decoder models use
``alpha_d = (3M)^(1/4)``, ``beta_d = (12M)^(-1/4)`` for the decoder and, for the
encoder, either the exact forms ``alpha_e = (N^4 M / 27)^(1/16)``,
``beta_e = 2^(-1/2) (N^4 M / 27)^(-1/16)`` or the published roundings
``0.81 (N^4 M)^(1/16)`` and ``0.87 (N^4 M)^(-1/16)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

from deepnorm_lab.config.errors import ConfigError
from deepnorm_lab.config.models import ArchShape, GainForm
from deepnorm_lab.runtime.errors import LayerIndexError

ROUNDED_ALPHA_ENC = 0.81
ROUNDED_BETA_ENC = 0.87
EXACT_ALPHA_ENC = 27.0 ** (-1.0 / 16.0)
EXACT_BETA_ENC = 2.0**-0.5 * 27.0 ** (1.0 / 16.0)


@dataclass(frozen=True, slots=True)
class GainSpec:
    """Per-component DeepNorm constants; absent components are ``None``.

    ``alpha_enc`` is the formula value and drops below 1 for encoder-decoder
    models with ``N^4 M < 27``. The encoder residual then uses
    ``residual_alpha_enc = max(1, alpha_enc)`` and ``alpha_enc_clamped`` is set.
    """

    alpha_enc: float | None = None
    beta_enc: float | None = None
    alpha_dec: float | None = None
    beta_dec: float | None = None

    @property
    def alpha_enc_clamped(self) -> bool:
        return self.alpha_enc is not None and self.alpha_enc < 1.0

    @property
    def residual_alpha_enc(self) -> float | None:
        if self.alpha_enc is None:
            return None
        return max(1.0, self.alpha_enc)

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            key: value for key, value in asdict(self).items() if value is not None
        }
        if self.alpha_enc_clamped:
            payload["residual_alpha_enc"] = self.residual_alpha_enc
            payload["alpha_enc_clamped"] = True
        return payload


def single_stack_gains(layers: int) -> tuple[float, float]:
    """``(alpha, beta)`` for an L-layer encoder-only or decoder-only stack."""
    return (2.0 * layers) ** 0.25, (8.0 * layers) ** -0.25


def encoder_decoder_gains(n: int, m: int, form: GainForm = "exact") -> GainSpec:
    depth_term = float(n) ** 4 * float(m)
    if form == "rounded":
        alpha_enc = ROUNDED_ALPHA_ENC * depth_term ** (1.0 / 16.0)
        beta_enc = ROUNDED_BETA_ENC * depth_term ** (-1.0 / 16.0)
    else:
        alpha_enc = EXACT_ALPHA_ENC * depth_term ** (1.0 / 16.0)
        beta_enc = EXACT_BETA_ENC * depth_term ** (-1.0 / 16.0)
    return GainSpec(
        alpha_enc=alpha_enc,
        beta_enc=beta_enc,
        alpha_dec=(3.0 * m) ** 0.25,
        beta_dec=(12.0 * m) ** -0.25,
    )


def compute_gains(arch: ArchShape, form: GainForm = "exact") -> GainSpec:
    """DeepNorm ``(alpha, beta)`` for every component present in ``arch``.

    Raises:
        ConfigError: If the layer count required by ``arch.kind`` is missing.
    """
    if arch.kind == "encoder_only":
        if arch.n is None:
            raise ConfigError("encoder_only gains need the encoder layer count n")
        alpha, beta = single_stack_gains(arch.n)
        return GainSpec(alpha_enc=alpha, beta_enc=beta)
    if arch.kind == "decoder_only":
        if arch.m is None:
            raise ConfigError("decoder_only gains need the decoder layer count m")
        alpha, beta = single_stack_gains(arch.m)
        return GainSpec(alpha_dec=alpha, beta_dec=beta)
    if arch.n is None or arch.m is None:
        raise ConfigError("encoder_decoder gains need both n and m")
    return encoder_decoder_gains(arch.n, arch.m, form)


def postln_init_scale(layer: int, depth: int) -> float:
    """Down-scale factor ``k_l = N - l + 1`` for layer ``l`` of an N-layer stack."""
    if depth < 1 or not 1 <= layer <= depth:
        raise LayerIndexError(f"layer index {layer} outside 1..{depth}")
    return float(depth - layer + 1)


def postln_init_std(layer: int, depth: int, fan_in: int, fan_out: int) -> float:
    """Std of ``N(0, 1 / (k_l^2 d'))`` with ``d'`` the mean of fan-in and fan-out."""
    d_prime = (fan_in + fan_out) / 2.0
    return 1.0 / (postln_init_scale(layer, depth) * math.sqrt(d_prime))


def single_stack_coefficient(alpha: float, beta: float, layers: int) -> float:
    """``2L (2 beta^2) / alpha^2``; equals 1 under DeepNorm gains."""
    return 2.0 * layers * (2.0 * beta**2) / alpha**2


def decoder_term_coefficient(gains: GainSpec, m: int) -> float:
    """``3M (2 beta_d^2) / alpha_d^2``; the decoder term of the update bound per eta."""
    if gains.alpha_dec is None or gains.beta_dec is None:
        raise ConfigError("decoder gains are absent")
    return 3.0 * m * (2.0 * gains.beta_dec**2) / gains.alpha_dec**2


def encoder_term_coefficient(gains: GainSpec, n: int, m: int) -> float:
    """``M (beta_d^2 / alpha_d) 2N (2 beta_e^2) / alpha_e^2``; the encoder term per eta.

    Each encoder sub-layer moves by ``eta * sqrt(2 beta_e^2) / alpha_e`` under
    SGD, which supplies the second ``sqrt(2 beta_e^2) / alpha_e`` factor.
    """
    if None in (gains.alpha_enc, gains.beta_enc, gains.alpha_dec, gains.beta_dec):
        raise ConfigError("encoder-decoder gains are incomplete")
    assert gains.alpha_enc is not None and gains.beta_enc is not None
    assert gains.alpha_dec is not None and gains.beta_dec is not None
    cross = m * gains.beta_dec**2 / gains.alpha_dec
    return cross * 2.0 * n * (2.0 * gains.beta_enc**2) / gains.alpha_enc**2
