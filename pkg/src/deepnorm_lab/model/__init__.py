"""Tiny Transformers with injectable normalization and initialization schemes."""

from deepnorm_lab.model.attention import (
    SubLayer,
    attention_forward,
    attention_row_bound,
    causal_mask,
    ffn_forward,
    head_views,
)
from deepnorm_lab.model.checkpoint import (
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from deepnorm_lab.model.transformer import (
    BOS_TOKEN,
    ForwardProbe,
    TransformerModel,
    build_model,
    model_forward,
    sinusoidal_positions,
)

__all__ = [
    "BOS_TOKEN",
    "ForwardProbe",
    "SubLayer",
    "TransformerModel",
    "attention_forward",
    "attention_row_bound",
    "build_model",
    "causal_mask",
    "decode_checkpoint",
    "encode_checkpoint",
    "ffn_forward",
    "head_views",
    "load_checkpoint",
    "model_forward",
    "save_checkpoint",
    "sinusoidal_positions",
]
