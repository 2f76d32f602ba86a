"""DeepNorm gains, Post-LN-init scales and residual composition rules."""

from deepnorm_lab.norm.gains import (
    GainSpec,
    compute_gains,
    decoder_term_coefficient,
    encoder_decoder_gains,
    encoder_term_coefficient,
    postln_init_scale,
    postln_init_std,
    single_stack_coefficient,
    single_stack_gains,
)
from deepnorm_lab.norm.residual import NormScheme, apply_residual

__all__ = [
    "GainSpec",
    "NormScheme",
    "apply_residual",
    "compute_gains",
    "decoder_term_coefficient",
    "encoder_decoder_gains",
    "encoder_term_coefficient",
    "postln_init_scale",
    "postln_init_std",
    "single_stack_coefficient",
    "single_stack_gains",
]
