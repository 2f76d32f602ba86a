"""One-dimensional reductions of Post-LN / DeepNorm stacks.

With hidden size 1 each sub-layer ``i`` is a value scalar ``v_i`` and an output
scalar ``w_i``; a self-attention or FFN block maps ``x`` to
``(alpha + v w) / sqrt(alpha^2 + v^2 w^2) * x`` and a cross-attention block maps
the decoder state ``y`` to ``(alpha_d y + v w x_e) / sqrt(alpha_d^2 + v^2 w^2)``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Literal

from deepnorm_lab.config.models import ArchShape, GainForm
from deepnorm_lab.norm.gains import compute_gains
from deepnorm_lab.runtime.errors import AssumptionError, DimensionError, InputError

ScalarKind = Literal["self_attention", "cross_attention", "ffn"]


def step_gain(alpha: float, v: float, w: float) -> float:
    """Magnitude factor of one self-attention or FFN block."""
    product = v * w
    return (alpha + product) / math.sqrt(alpha * alpha + product * product)


def cross_step(alpha: float, v: float, w: float, y: float, x_enc: float) -> float:
    product = v * w
    return (alpha * y + product * x_enc) / math.sqrt(alpha * alpha + product * product)


def _check_pairs(name: str, v: Sequence[float], w: Sequence[float], expected: int) -> None:
    if len(v) != expected or len(w) != expected:
        raise DimensionError(
            f"{name} needs {expected} (v, w) pairs, got {len(v)} v and {len(w)} w"
        )
    for index, (v_i, w_i) in enumerate(zip(v, w, strict=True)):
        if not (0.0 < v_i <= 1.0 and 0.0 < w_i <= 1.0):
            raise AssumptionError(
                f"{name}[{index}] = ({v_i}, {w_i}) outside 0 < v, w <= 1"
            )


@dataclass(frozen=True, slots=True)
class ScalarModel:
    """Scalar stand-in for an architecture; lists follow theta order per component.

    Raises:
        DimensionError: If a list length disagrees with ``arch`` (2N encoder,
            3M encoder-decoder decoder, 2M decoder-only decoder).
        AssumptionError: If any scalar leaves ``(0, 1]`` or any alpha is below 1.
    """

    arch: ArchShape
    v_enc: tuple[float, ...] = ()
    w_enc: tuple[float, ...] = ()
    v_dec: tuple[float, ...] = ()
    w_dec: tuple[float, ...] = ()
    alpha_enc: float = 1.0
    alpha_dec: float = 1.0

    def __post_init__(self) -> None:
        _check_pairs("encoder", self.v_enc, self.w_enc, self.arch.encoder_sublayers)
        _check_pairs("decoder", self.v_dec, self.w_dec, self.arch.decoder_sublayers)
        if self.alpha_enc < 1.0 or self.alpha_dec < 1.0:
            raise AssumptionError(
                f"alpha must be >= 1, got encoder {self.alpha_enc} and decoder {self.alpha_dec}"
            )

    @classmethod
    def uniform(
        cls,
        arch: ArchShape,
        *,
        v: float,
        w: float,
        alpha_enc: float = 1.0,
        alpha_dec: float = 1.0,
    ) -> ScalarModel:
        n_enc = arch.encoder_sublayers
        n_dec = arch.decoder_sublayers
        return cls(
            arch=arch,
            v_enc=(v,) * n_enc,
            w_enc=(w,) * n_enc,
            v_dec=(v,) * n_dec,
            w_dec=(w,) * n_dec,
            alpha_enc=alpha_enc,
            alpha_dec=alpha_dec,
        )

    @classmethod
    def vanilla(cls, arch: ArchShape) -> ScalarModel:
        """Post-LN: every scalar 1 and alpha 1."""
        return cls.uniform(arch, v=1.0, w=1.0)

    @classmethod
    def from_gains(cls, arch: ArchShape, form: GainForm = "exact") -> ScalarModel:
        """DeepNorm at initialization: ``v = w = beta`` and the residual alpha per component."""
        gains = compute_gains(arch, form)
        beta_enc = gains.beta_enc or 1.0
        beta_dec = gains.beta_dec or 1.0
        return cls(
            arch=arch,
            v_enc=(beta_enc,) * arch.encoder_sublayers,
            w_enc=(beta_enc,) * arch.encoder_sublayers,
            v_dec=(beta_dec,) * arch.decoder_sublayers,
            w_dec=(beta_dec,) * arch.decoder_sublayers,
            alpha_enc=gains.alpha_enc or 1.0,
            alpha_dec=gains.alpha_dec or 1.0,
        )

    @property
    def v(self) -> tuple[float, ...]:
        return self.v_enc + self.v_dec

    @property
    def w(self) -> tuple[float, ...]:
        return self.w_enc + self.w_dec

    def decoder_kinds(self) -> list[ScalarKind]:
        per_layer: tuple[ScalarKind, ...] = (
            ("self_attention", "cross_attention", "ffn")
            if self.arch.kind == "encoder_decoder"
            else ("self_attention", "ffn")
        )
        return list(per_layer) * self.arch.decoder_layers

    def cross_indices(self) -> list[int]:
        return [i for i, kind in enumerate(self.decoder_kinds()) if kind == "cross_attention"]

    def with_scalars(
        self,
        *,
        v_enc: Sequence[float] | None = None,
        w_enc: Sequence[float] | None = None,
        v_dec: Sequence[float] | None = None,
        w_dec: Sequence[float] | None = None,
    ) -> ScalarModel:
        return replace(
            self,
            v_enc=tuple(self.v_enc if v_enc is None else v_enc),
            w_enc=tuple(self.w_enc if w_enc is None else w_enc),
            v_dec=tuple(self.v_dec if v_dec is None else v_dec),
            w_dec=tuple(self.w_dec if w_dec is None else w_dec),
        )


def encoder_output(model: ScalarModel, x: float) -> float:
    for v_i, w_i in zip(model.v_enc, model.w_enc, strict=True):
        x *= step_gain(model.alpha_enc, v_i, w_i)
    return x


def scalar_forward(model: ScalarModel, x: float, *, y: float | None = None) -> float:
    """Iterate the magnitude recursions through every sub-layer.

    The encoder chain starts from ``x``; the decoder chain starts from ``y``
    (default ``x``) and, for encoder-decoder models, mixes in the encoder output
    at every cross-attention position. Encoder-only models return the encoder
    output.
    """
    if not math.isfinite(x):
        raise InputError(f"scalar input must be finite, got {x}")
    if model.arch.kind == "encoder_only":
        return encoder_output(model, x)

    x_enc = encoder_output(model, x) if model.arch.has_encoder else 0.0
    state = x if y is None else y
    kinds = model.decoder_kinds()
    for kind, v_i, w_i in zip(kinds, model.v_dec, model.w_dec, strict=True):
        if kind == "cross_attention":
            state = cross_step(model.alpha_dec, v_i, w_i, state, x_enc)
        else:
            state *= step_gain(model.alpha_dec, v_i, w_i)
    return state


def normalized_update(base: ScalarModel, perturbed: ScalarModel) -> float:
    """``|F*/F - 1|`` with every block reading LayerNorm-scaled (unit) inputs.

    Each LN output is unit-magnitude under both parameter settings, so the
    change of a block is its own factor ratio applied to the incoming relative
    change; cross-attention blends the decoder-side and encoder-side relative
    changes with the perturbed weights. For the encoder chain this equals
    ``|scalar_forward(perturbed, 1) / scalar_forward(base, 1) - 1|``.
    """
    if base.arch != perturbed.arch:
        raise DimensionError("base and perturbed models describe different architectures")

    rel_enc = 1.0
    pairs = zip(base.v_enc, base.w_enc, perturbed.v_enc, perturbed.w_enc, strict=True)
    for v0, w0, v1, w1 in pairs:
        rel_enc *= step_gain(base.alpha_enc, v1, w1) / step_gain(base.alpha_enc, v0, w0)
    if base.arch.kind == "encoder_only":
        return abs(rel_enc - 1.0)

    alpha = base.alpha_dec
    rel = 1.0
    kinds = base.decoder_kinds()
    for kind, v0, w0, v1, w1 in zip(
        kinds, base.v_dec, base.w_dec, perturbed.v_dec, perturbed.w_dec, strict=True
    ):
        if kind == "cross_attention":
            rel = cross_step(alpha, v1, w1, rel, rel_enc) / cross_step(alpha, v0, w0, 1.0, 1.0)
        else:
            rel *= step_gain(alpha, v1, w1) / step_gain(alpha, v0, w0)
    return abs(rel - 1.0)
