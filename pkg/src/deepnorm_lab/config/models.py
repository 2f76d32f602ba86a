"""Typed configuration models with Pydantic validation."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

ArchKind = Literal["encoder_only", "decoder_only", "encoder_decoder"]
NormVariant = Literal["post_ln", "pre_ln", "no_ln", "deepnorm"]
InitScheme = Literal["xavier_gain1", "deepnorm_init", "postln_init"]
GainForm = Literal["exact", "rounded"]
TaskKind = Literal["copy", "reverse", "sort"]
SchemePreset = Literal["post_ln", "pre_ln", "no_ln", "deepnorm", "post_ln_init"]

SCHEME_PRESETS: dict[str, tuple[NormVariant, InitScheme]] = {
    "post_ln": ("post_ln", "xavier_gain1"),
    "pre_ln": ("pre_ln", "xavier_gain1"),
    "no_ln": ("no_ln", "xavier_gain1"),
    "deepnorm": ("deepnorm", "deepnorm_init"),
    "post_ln_init": ("post_ln", "postln_init"),
}


class ArchShape(BaseModel):
    """Architecture descriptor: kind plus encoder (N) and decoder (M) layer counts."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ArchKind = Field(..., description="Architecture family")
    n: int | None = Field(default=None, ge=1, description="Encoder layer count")
    m: int | None = Field(default=None, ge=1, description="Decoder layer count")

    @model_validator(mode="after")
    def _check_counts(self) -> ArchShape:
        if self.kind in ("encoder_only", "encoder_decoder") and self.n is None:
            raise ValueError(f"{self.kind} requires the encoder layer count n")
        if self.kind in ("decoder_only", "encoder_decoder") and self.m is None:
            raise ValueError(f"{self.kind} requires the decoder layer count m")
        if self.kind == "encoder_only" and self.m is not None:
            raise ValueError("encoder_only has no decoder layer count")
        if self.kind == "decoder_only" and self.n is not None:
            raise ValueError("decoder_only has no encoder layer count")
        return self

    @classmethod
    def with_depth(cls, kind: ArchKind, depth: int) -> ArchShape:
        """Build the shape for an ``AL-AL`` style depth (N = M = depth where present)."""
        if kind == "encoder_only":
            return cls(kind=kind, n=depth)
        if kind == "decoder_only":
            return cls(kind=kind, m=depth)
        return cls(kind=kind, n=depth, m=depth)

    @property
    def has_encoder(self) -> bool:
        return self.kind != "decoder_only"

    @property
    def has_decoder(self) -> bool:
        return self.kind != "encoder_only"

    @property
    def encoder_layers(self) -> int:
        return self.n or 0

    @property
    def decoder_layers(self) -> int:
        return self.m or 0

    @property
    def encoder_sublayers(self) -> int:
        return 2 * self.encoder_layers

    @property
    def decoder_sublayers(self) -> int:
        per_layer = 3 if self.kind == "encoder_decoder" else 2
        return per_layer * self.decoder_layers


class LoggingSettings(BaseModel):
    """Logging configuration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO", description="Log level"
    )
    format: Literal["json", "text"] = Field(default="json", description="Log output format")


class ModelConfig(BaseModel):
    """Geometry, normalization and initialization of a tiny Transformer."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    arch: ArchShape
    d_model: int = Field(default=64, ge=2, description="Hidden size")
    n_heads: int = Field(default=4, ge=1, description="Attention heads")
    d_ffn: int = Field(default=128, ge=1, description="Feed-forward inner size")
    vocab_size: int = Field(default=32, ge=2, description="Token vocabulary size")
    max_seq_len: int = Field(default=64, ge=1, description="Longest supported sequence")
    norm: NormVariant = Field(default="post_ln", description="Residual normalization scheme")
    init: InitScheme = Field(default="xavier_gain1", description="Weight initialization scheme")
    gain_form: GainForm = Field(default="exact", description="Exact or rounded DeepNorm gains")
    ln_eps: float = Field(default=1e-5, gt=0.0, description="LayerNorm epsilon")
    ln_affine: bool = Field(default=False, description="Learned LayerNorm scale and bias")
    dropout: float = Field(default=0.0, ge=0.0, lt=1.0, description="Residual-branch dropout")
    seed: int = Field(default=0, ge=0, description="Weight initialization seed")

    @model_validator(mode="after")
    def _check_heads(self) -> ModelConfig:
        if self.d_model % self.n_heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})"
            )
        return self

    @property
    def d_k(self) -> int:
        return self.d_model // self.n_heads


class TaskSpec(BaseModel):
    """Synthetic sequence-to-sequence task."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: TaskKind = Field(default="copy", description="copy, reverse or sort")
    vocab_size: int = Field(
        default=32,
        ge=2,
        description="Tokens are drawn from [1, vocab_size); 0 is the start token",
    )
    seq_len: int = Field(default=16, ge=2, description="Sequence length")


class OptimizerConfig(BaseModel):
    """SGD or Adam hyperparameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["sgd", "adam"] = Field(default="adam", description="Optimizer")
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.98, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)


class ScheduleConfig(BaseModel):
    """Learning-rate schedule."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["constant", "inverse_sqrt"] = Field(default="constant")
    warmup_steps: int = Field(default=0, ge=0)
    warmup_init_lr: float = Field(default=1e-7, ge=0.0)


class TrainConfig(BaseModel):
    """Optimization loop, task and instrumentation settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    lr: float = Field(default=5e-4, ge=0.0, description="Peak learning rate")
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    steps: int = Field(default=2000, ge=0)
    batch_size: int = Field(default=8, ge=1)
    task: TaskSpec = Field(default_factory=TaskSpec)
    grad_clip: float | None = Field(default=None, gt=0.0, description="Global-norm clip")
    label_smoothing: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0, description="Data and dropout seed")
    record_interval: int = Field(default=10, ge=1, description="Steps between trace records")
    probe_batch_size: int = Field(default=8, ge=1, description="Held-out probe batch size")
    divergence_factor: float = Field(
        default=1000.0,
        gt=1.0,
        description="Loss multiple of the step-0 loss that counts as divergence",
    )
    normalize_loss_grad: bool = Field(
        default=False,
        description="Rescale dL/dF to unit norm before backprop",
    )


class SweepAxes(BaseModel):
    """Cartesian sweep over scheme presets, layer depths, seeds and warmups."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    schemes: list[SchemePreset] = Field(..., min_length=1)
    depths: list[int] = Field(..., min_length=1, description="Layer counts (AL-AL), not sub-layers")
    seeds: list[int] = Field(..., min_length=1)
    warmups: list[int] | None = Field(
        default=None,
        description="Optional inverse-sqrt warmup steps axis; None keeps the train schedule",
    )

    @model_validator(mode="after")
    def _check_values(self) -> SweepAxes:
        if any(depth < 1 for depth in self.depths):
            raise ValueError("depths must be >= 1")
        if any(seed < 0 for seed in self.seeds):
            raise ValueError("seeds must be >= 0")
        if self.warmups is not None and (
            not self.warmups or any(steps < 0 for steps in self.warmups)
        ):
            raise ValueError("warmups must be a non-empty list of values >= 0")
        return self


class ModelSection(BaseModel):
    """Model section of an experiment; the layer counts come from the sweep depth."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ArchKind = Field(default="encoder_decoder")
    d_model: int = Field(default=64, ge=2)
    n_heads: int = Field(default=4, ge=1)
    d_ffn: int = Field(default=128, ge=1)
    max_seq_len: int = Field(default=64, ge=1)
    gain_form: GainForm = Field(default="exact")
    ln_eps: float = Field(default=1e-5, gt=0.0)
    ln_affine: bool = Field(default=False)
    dropout: float = Field(default=0.0, ge=0.0, lt=1.0)


class ExperimentConfig(BaseModel):
    """Root document for ``deepnorm-lab train``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: Literal[1] = 1
    name: str = Field(default="experiment", min_length=1)
    model: ModelSection = Field(default_factory=ModelSection)
    train: TrainConfig = Field(default_factory=TrainConfig)
    sweep: SweepAxes
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


class VerifyConfig(BaseModel):
    """Root document for ``deepnorm-lab verify``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: Literal[1] = 1
    seed: int = Field(default=0, ge=0)
    kinds: list[ArchKind] = Field(
        default_factory=lambda: ["encoder_only", "decoder_only", "encoder_decoder"], min_length=1
    )
    gain_form: GainForm = Field(default="exact")
    eta: float = Field(default=1e-4, ge=0.0)
    trials: int = Field(default=500, ge=1)
    depths: list[int] = Field(default_factory=lambda: [1, 4, 16, 64], min_length=1)
    thm2_depths: list[int] = Field(default_factory=lambda: [2, 8, 18], min_length=1)
    eta_curve: list[float] = Field(default_factory=lambda: [1e-3, 1e-4, 1e-5], min_length=1)
    ratio_tolerance: float = Field(default=1.01, ge=1.0)
    directions: list[Literal["sphere", "gradient"]] = Field(
        default_factory=lambda: ["sphere", "gradient"],
        min_length=1,
        description="Perturbation directions checked per architecture and depth",
    )
    bound_alpha_scale: float = Field(
        default=1.0,
        gt=0.0,
        description="Multiplier on alpha inside the bound; 2.0 is the negative control",
    )
    lemma_trials: int = Field(default=1000, ge=1)
    lemma_ns: list[int] = Field(default_factory=lambda: [2, 8, 32], min_length=1)
    lemma_ds: list[int] = Field(default_factory=lambda: [4, 16, 64], min_length=1)
    identity_depths: list[int] = Field(
        default_factory=lambda: [1, 2, 3, 5, 10, 18, 32, 56, 100, 178, 316, 562, 1000],
        min_length=1,
    )
    rounded_depths: list[int] = Field(default_factory=lambda: [1, 10, 100, 1000], min_length=1)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    @model_validator(mode="after")
    def _check_depths(self) -> VerifyConfig:
        for field_name in ("depths", "thm2_depths", "identity_depths", "rounded_depths"):
            if any(depth < 1 for depth in getattr(self, field_name)):
                raise ValueError(f"{field_name} must be >= 1")
        if any(eta < 0 for eta in self.eta_curve):
            raise ValueError("eta_curve entries must be >= 0")
        return self
