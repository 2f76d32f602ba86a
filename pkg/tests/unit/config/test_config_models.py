"""Tests for configuration models."""

from __future__ import annotations

import pytest
from pydantic import ValidationError

from deepnorm_lab.config.models import (
    SCHEME_PRESETS,
    ArchShape,
    ExperimentConfig,
    ModelConfig,
    SweepAxes,
    TrainConfig,
    VerifyConfig,
)


class TestArchShape:
    """Layer counts per architecture kind."""

    @pytest.mark.parametrize(
        ("kind", "expected"),
        [
            ("encoder_only", {"n": 6, "m": None}),
            ("decoder_only", {"n": None, "m": 6}),
            ("encoder_decoder", {"n": 6, "m": 6}),
        ],
    )
    def test_with_depth(self, kind: str, expected: dict[str, int | None]) -> None:
        arch = ArchShape.with_depth(kind, 6)  # type: ignore[arg-type]

        assert {"n": arch.n, "m": arch.m} == expected

    def test_sublayer_counts(self) -> None:
        arch = ArchShape(kind="encoder_decoder", n=4, m=3)

        assert arch.encoder_sublayers == 8
        assert arch.decoder_sublayers == 9
        assert ArchShape(kind="decoder_only", m=3).decoder_sublayers == 6

    @pytest.mark.parametrize(
        "payload",
        [
            {"kind": "encoder_only"},
            {"kind": "encoder_only", "n": 2, "m": 2},
            {"kind": "decoder_only", "n": 2, "m": 2},
            {"kind": "encoder_decoder", "n": 2},
            {"kind": "encoder_only", "n": 0},
        ],
    )
    def test_inconsistent_counts_are_rejected(self, payload: dict[str, object]) -> None:
        with pytest.raises(ValidationError):
            ArchShape.model_validate(payload)


class TestModelConfig:
    """Defaults and geometry checks."""

    def test_defaults(self) -> None:
        config = ModelConfig(arch=ArchShape(kind="encoder_only", n=2))

        assert config.d_model == 64
        assert config.n_heads == 4
        assert config.d_k == 16
        assert config.norm == "post_ln"
        assert config.init == "xavier_gain1"
        assert config.ln_affine is False

    def test_heads_must_divide_width(self) -> None:
        with pytest.raises(ValidationError, match="divisible"):
            ModelConfig(arch=ArchShape(kind="encoder_only", n=2), d_model=10, n_heads=4)

    def test_models_are_frozen(self) -> None:
        config = ModelConfig(arch=ArchShape(kind="encoder_only", n=2))

        with pytest.raises(ValidationError):
            config.d_model = 32  # type: ignore[misc]


class TestTrainConfig:
    """Loop settings."""

    def test_defaults(self) -> None:
        config = TrainConfig()

        assert config.optimizer.kind == "adam"
        assert config.optimizer.beta2 == 0.98
        assert config.lr == 5e-4
        assert config.divergence_factor == 1000.0
        assert config.schedule.kind == "constant"

    def test_divergence_factor_must_exceed_one(self) -> None:
        with pytest.raises(ValidationError):
            TrainConfig(divergence_factor=1.0)

    def test_unknown_fields_are_rejected(self) -> None:
        with pytest.raises(ValidationError):
            TrainConfig.model_validate({"learning_rate": 1e-3})


class TestSweepAxes:
    """Sweep grid validation."""

    def test_every_preset_maps_to_a_scheme(self) -> None:
        assert set(SCHEME_PRESETS) == {"post_ln", "pre_ln", "no_ln", "deepnorm", "post_ln_init"}
        assert SCHEME_PRESETS["post_ln_init"] == ("post_ln", "postln_init")

    @pytest.mark.parametrize(
        "payload",
        [
            {"schemes": [], "depths": [2], "seeds": [0]},
            {"schemes": ["deepnorm"], "depths": [0], "seeds": [0]},
            {"schemes": ["deepnorm"], "depths": [2], "seeds": [-1]},
            {"schemes": ["deepnorm"], "depths": [2], "seeds": [0], "warmups": []},
        ],
    )
    def test_invalid_axes(self, payload: dict[str, object]) -> None:
        with pytest.raises(ValidationError):
            SweepAxes.model_validate(payload)

    def test_experiment_requires_sweep(self) -> None:
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({})


class TestVerifyConfig:
    """Verification protocol defaults."""

    def test_defaults(self) -> None:
        config = VerifyConfig()

        assert config.eta == 1e-4
        assert config.trials == 500
        assert config.depths == [1, 4, 16, 64]
        assert config.ratio_tolerance == 1.01
        assert config.bound_alpha_scale == 1.0

    @pytest.mark.parametrize(
        "payload",
        [{"depths": [0]}, {"eta_curve": [-1e-3]}, {"ratio_tolerance": 0.9}, {"trials": 0}],
    )
    def test_invalid_protocols(self, payload: dict[str, object]) -> None:
        with pytest.raises(ValidationError):
            VerifyConfig.model_validate(payload)
