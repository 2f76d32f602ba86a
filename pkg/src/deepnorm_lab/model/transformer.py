"""Tiny encoder-only, decoder-only and encoder-decoder Transformers.

Sub-layers are addressed as ``<component>_<layer>_<path>`` with 1-based layer
indices; ``encoder_sublayers()`` yields the 2N blocks in theta order (attention
then FFN per layer) and ``decoder_sublayers()`` the 3M (or 2M for decoder-only)
blocks (self-attention, cross-attention, FFN per layer).
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from deepnorm_lab.autodiff import ops
from deepnorm_lab.autodiff.init import ones, xavier_normal, zeros
from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.config.errors import ConfigError
from deepnorm_lab.config.models import ModelConfig
from deepnorm_lab.model.attention import (
    ATTENTION_WEIGHTS,
    FFN_WEIGHTS,
    SCALED_WEIGHTS,
    Component,
    SubLayer,
    SubLayerKind,
    attention_forward,
    ffn_forward,
)
from deepnorm_lab.norm.gains import GainSpec, compute_gains, postln_init_scale
from deepnorm_lab.norm.residual import LnObserver, NormScheme, apply_residual
from deepnorm_lab.observability.logging import get_event_logger
from deepnorm_lab.runtime.errors import DimensionError, InputError
from deepnorm_lab.runtime.rng import generator_for

BOS_TOKEN = 0

_logger = get_event_logger(__name__)


@dataclass(slots=True)
class ForwardProbe:
    """Collects the mean per-token norm of every LayerNorm input, keyed by sub-layer name."""

    ln_inputs: dict[str, float] = field(default_factory=dict)

    def observer(self, sublayer: SubLayer) -> LnObserver:
        def record(value: Tensor) -> None:
            norms = np.linalg.norm(value.data, axis=-1)
            self.ln_inputs[sublayer.name] = float(norms.mean())

        return record


@dataclass(slots=True)
class TransformerModel:
    """Weights, normalization schemes and gains of one built model."""

    config: ModelConfig
    embedding: Tensor
    output: Tensor
    encoder_layers: list[tuple[SubLayer, ...]]
    decoder_layers: list[tuple[SubLayer, ...]]
    encoder_scheme: NormScheme | None
    decoder_scheme: NormScheme | None
    gains: GainSpec | None = None
    final_norms: dict[str, tuple[Tensor | None, Tensor | None]] = field(default_factory=dict)

    def encoder_sublayers(self) -> list[SubLayer]:
        return [block for layer in self.encoder_layers for block in layer]

    def decoder_sublayers(self) -> list[SubLayer]:
        return [block for layer in self.decoder_layers for block in layer]

    def sublayers(self) -> list[SubLayer]:
        return self.encoder_sublayers() + self.decoder_sublayers()

    def parameters(self) -> list[tuple[str, Tensor]]:
        """Every trainable tensor in a fixed order (embedding, sub-layers, final norms, output)."""
        params: list[tuple[str, Tensor]] = [("embedding", self.embedding)]
        for block in self.sublayers():
            params.extend(block.parameters())
        for component, (gain, bias) in self.final_norms.items():
            if gain is not None:
                params.append((f"{component}_final.ln_gain", gain))
            if bias is not None:
                params.append((f"{component}_final.ln_bias", bias))
        params.append(("output", self.output))
        return params

    def iter_tensors(self) -> Iterator[Tensor]:
        for _, tensor in self.parameters():
            yield tensor

    def zero_grad(self) -> None:
        for tensor in self.iter_tensors():
            tensor.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = dict(self.parameters())
        missing = sorted(set(params) - set(state))
        if missing:
            raise InputError(f"state is missing tensors: {', '.join(missing)}")
        unexpected = sorted(set(state) - set(params))
        if unexpected:
            raise InputError(f"state has unexpected tensors: {', '.join(unexpected)}")
        for name, tensor in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != tensor.data.shape:
                raise DimensionError(f"{name}: shape {value.shape} != {tensor.shape}")
            tensor.data = value.copy()

    def parameter_partition(self) -> tuple[list[SubLayer], list[SubLayer]]:
        """``(theta_e, theta_d)``: 2N encoder and 3M (2M decoder-only) decoder sub-layers."""
        return self.encoder_sublayers(), self.decoder_sublayers()


def _scheme(config: ModelConfig, alpha: float | None) -> NormScheme:
    if config.norm == "deepnorm":
        if alpha is None:
            raise ConfigError("deepnorm needs alpha for every present component")
        return NormScheme.deepnorm(alpha)
    return NormScheme(config.norm)


def _sublayer(
    config: ModelConfig,
    kind: SubLayerKind,
    component: Component,
    layer: int,
    depth: int,
    beta: float | None,
) -> SubLayer:
    block = SubLayer(kind=kind, component=component, layer=layer, weights={})
    d_model = config.d_model
    shapes = (
        {name: (d_model, d_model) for name in ATTENTION_WEIGHTS}
        if kind != "ffn"
        else dict(zip(FFN_WEIGHTS, ((d_model, config.d_ffn), (config.d_ffn, d_model)), strict=True))
    )
    for weight_name, (fan_in, fan_out) in shapes.items():
        name = f"{block.name}.{weight_name}"
        gain = 1.0
        if config.init == "deepnorm_init" and weight_name in SCALED_WEIGHTS:
            if beta is None:
                raise ConfigError(f"deepnorm_init has no beta for {component}")
            gain = beta
        tensor = xavier_normal(fan_in, fan_out, gain, generator_for(config.seed, name), name=name)
        if config.init == "postln_init" and weight_name in SCALED_WEIGHTS:
            tensor.data /= postln_init_scale(layer, depth)
        block.weights[weight_name] = tensor
    if config.ln_affine and config.norm != "no_ln":
        block.ln_gain = ones((d_model,), name=f"{block.name}.ln_gain")
        block.ln_bias = zeros((d_model,), name=f"{block.name}.ln_bias")
    return block


def build_model(config: ModelConfig) -> TransformerModel:
    """Draw every weight from its own named Philox stream per ``config.init``.

    A DeepNorm encoder whose exact gain falls below 1 uses ``alpha = 1`` for its
    residual; ``model.gains`` keeps the formula value.

    Raises:
        ConfigError: If a DeepNorm scheme cannot obtain its gains.
    """
    arch = config.arch
    gains = None
    if config.norm == "deepnorm" or config.init == "deepnorm_init":
        gains = compute_gains(arch, config.gain_form)
        if config.norm == "deepnorm" and gains.alpha_enc_clamped:
            _logger.warning(
                "encoder_alpha_clamped",
                alpha_enc=gains.alpha_enc,
                residual_alpha=gains.residual_alpha_enc,
            )

    encoder_layers: list[tuple[SubLayer, ...]] = []
    for layer in range(1, arch.encoder_layers + 1):
        beta = gains.beta_enc if gains else None
        encoder_layers.append(
            (
                _sublayer(config, "self_attention", "encoder", layer, arch.encoder_layers, beta),
                _sublayer(config, "ffn", "encoder", layer, arch.encoder_layers, beta),
            )
        )

    decoder_layers: list[tuple[SubLayer, ...]] = []
    for layer in range(1, arch.decoder_layers + 1):
        beta = gains.beta_dec if gains else None
        kinds: tuple[SubLayerKind, ...] = (
            ("self_attention", "cross_attention", "ffn")
            if arch.kind == "encoder_decoder"
            else ("self_attention", "ffn")
        )
        decoder_layers.append(
            tuple(
                _sublayer(config, kind, "decoder", layer, arch.decoder_layers, beta)
                for kind in kinds
            )
        )

    final_norms: dict[str, tuple[Tensor | None, Tensor | None]] = {}
    if config.norm == "pre_ln":
        for component, present in (("encoder", arch.has_encoder), ("decoder", arch.has_decoder)):
            if not present:
                continue
            if config.ln_affine:
                final_norms[component] = (
                    ones((config.d_model,), name=f"{component}_final.ln_gain"),
                    zeros((config.d_model,), name=f"{component}_final.ln_bias"),
                )
            else:
                final_norms[component] = (None, None)

    embedding = xavier_normal(
        config.vocab_size,
        config.d_model,
        1.0,
        generator_for(config.seed, "embedding"),
        name="embedding",
    )
    output = xavier_normal(
        config.d_model,
        config.vocab_size,
        1.0,
        generator_for(config.seed, "output"),
        name="output",
    )
    return TransformerModel(
        config=config,
        embedding=embedding,
        output=output,
        encoder_layers=encoder_layers,
        decoder_layers=decoder_layers,
        encoder_scheme=_scheme(config, gains.residual_alpha_enc if gains else None)
        if arch.has_encoder
        else None,
        decoder_scheme=_scheme(config, gains.alpha_dec if gains else None)
        if arch.has_decoder
        else None,
        gains=gains,
        final_norms=final_norms,
    )


def sinusoidal_positions(length: int, d_model: int) -> np.ndarray:
    """``PE[p, 2i] = sin(p / 10000^(2i/d))``, ``PE[p, 2i+1] = cos(...)``."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    rates = np.power(10000.0, -np.arange(0, d_model, 2, dtype=np.float64) / d_model)
    table = np.zeros((length, d_model))
    table[:, 0::2] = np.sin(positions * rates)
    table[:, 1::2] = np.cos(positions * rates[: d_model // 2])
    return table


def _token_ids(model: TransformerModel, tokens: np.ndarray | list[int], role: str) -> np.ndarray:
    ids = np.asarray(tokens, dtype=np.int64)
    if ids.ndim == 1:
        ids = ids[None, :]
    if ids.ndim != 2:
        raise InputError(f"{role} tokens must be (n,) or (B, n), got shape {ids.shape}")
    vocab = model.config.vocab_size
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        raise InputError(f"{role} token ids must lie in [0, {vocab})")
    if ids.shape[1] > model.config.max_seq_len:
        raise InputError(
            f"{role} length {ids.shape[1]} exceeds max_seq_len {model.config.max_seq_len}"
        )
    return ids


def _embed(model: TransformerModel, ids: np.ndarray) -> Tensor:
    d_model = model.config.d_model
    scaled = ops.scale(ops.embedding(model.embedding, ids), math.sqrt(d_model))
    return ops.add(scaled, Tensor(sinusoidal_positions(ids.shape[1], d_model)))


def _dropout(
    value: Tensor,
    rate: float,
    rng: np.random.Generator | None,
) -> Tensor:
    if rng is None or rate == 0.0:
        return value
    keep = (rng.random(value.shape) >= rate) / (1.0 - rate)
    return ops.mask_mul(value, keep)


def _block(
    model: TransformerModel,
    scheme: NormScheme,
    x: Tensor,
    block: SubLayer,
    memory: Tensor | None,
    probe: ForwardProbe | None,
    dropout_rng: np.random.Generator | None,
) -> Tensor:
    n_heads = model.config.n_heads

    def branch(h: Tensor) -> Tensor:
        if block.kind == "ffn":
            out = ffn_forward(h, block)
        elif block.kind == "cross_attention":
            assert memory is not None
            out = attention_forward(h, memory, block, causal=False, n_heads=n_heads)
        else:
            causal = block.component == "decoder"
            out = attention_forward(h, h, block, causal=causal, n_heads=n_heads)
        return _dropout(out, model.config.dropout, dropout_rng)

    return apply_residual(
        scheme,
        x,
        branch,
        model.config.ln_eps,
        ln_gain=block.ln_gain,
        ln_bias=block.ln_bias,
        observe_ln_input=probe.observer(block) if probe is not None else None,
    )


def _finish(model: TransformerModel, component: str, x: Tensor) -> Tensor:
    if component not in model.final_norms:
        return x
    gain, bias = model.final_norms[component]
    return ops.layer_norm(x, model.config.ln_eps, gain=gain, bias=bias)


def encode(
    model: TransformerModel,
    src_tokens: np.ndarray | list[int],
    *,
    probe: ForwardProbe | None = None,
    dropout_rng: np.random.Generator | None = None,
) -> Tensor:
    assert model.encoder_scheme is not None
    x = _embed(model, _token_ids(model, src_tokens, "source"))
    for block in model.encoder_sublayers():
        x = _block(model, model.encoder_scheme, x, block, None, probe, dropout_rng)
    return _finish(model, "encoder", x)


def decode(
    model: TransformerModel,
    tgt_tokens: np.ndarray | list[int],
    memory: Tensor | None,
    *,
    probe: ForwardProbe | None = None,
    dropout_rng: np.random.Generator | None = None,
) -> Tensor:
    assert model.decoder_scheme is not None
    ids = _token_ids(model, tgt_tokens, "target")
    if memory is not None and memory.shape[0] != ids.shape[0]:
        raise DimensionError(f"encoder batch {memory.shape[0]} != decoder batch {ids.shape[0]}")
    y = _embed(model, ids)
    for block in model.decoder_sublayers():
        y = _block(model, model.decoder_scheme, y, block, memory, probe, dropout_rng)
    return _finish(model, "decoder", y)


def model_forward(
    model: TransformerModel,
    src_tokens: np.ndarray | list[int] | None,
    tgt_tokens: np.ndarray | list[int] | None,
    *,
    probe: ForwardProbe | None = None,
    dropout_rng: np.random.Generator | None = None,
) -> Tensor:
    """Logits of shape ``(B, n, vocab_size)``.

    encoder_only reads ``src_tokens`` (``tgt_tokens`` is ignored), decoder_only
    reads ``tgt_tokens`` with a causal mask, encoder_decoder attends from the
    decoder over the encoder output of ``src_tokens``.

    Raises:
        InputError: On missing inputs or token ids outside ``[0, vocab_size)``.
    """
    kind = model.config.arch.kind
    if kind == "encoder_only":
        if src_tokens is None:
            raise InputError("encoder_only needs src_tokens")
        hidden = encode(model, src_tokens, probe=probe, dropout_rng=dropout_rng)
    elif kind == "decoder_only":
        if tgt_tokens is None:
            raise InputError("decoder_only needs tgt_tokens")
        hidden = decode(model, tgt_tokens, None, probe=probe, dropout_rng=dropout_rng)
    else:
        if src_tokens is None or tgt_tokens is None:
            raise InputError("encoder_decoder needs src_tokens and tgt_tokens")
        memory = encode(model, src_tokens, probe=probe, dropout_rng=dropout_rng)
        hidden = decode(model, tgt_tokens, memory, probe=probe, dropout_rng=dropout_rng)
    return ops.matmul(hidden, model.output)
