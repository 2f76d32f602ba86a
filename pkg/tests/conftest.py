from __future__ import annotations

from collections.abc import Callable
from typing import Any

import pytest

from deepnorm_lab.config.models import ArchKind, ArchShape, ModelConfig
from deepnorm_lab.observability.metrics import reset_metrics_recorder

ConfigFactory = Callable[..., ModelConfig]


def _tiny_config(
    kind: ArchKind = "encoder_decoder", depth: int = 2, **overrides: Any
) -> ModelConfig:
    values: dict[str, Any] = {
        "arch": ArchShape.with_depth(kind, depth),
        "d_model": 8,
        "n_heads": 2,
        "d_ffn": 16,
        "vocab_size": 11,
        "max_seq_len": 16,
    }
    values.update(overrides)
    return ModelConfig(**values)


@pytest.fixture
def tiny_config() -> ConfigFactory:
    """Factory for models small enough for finite differences."""
    return _tiny_config


@pytest.fixture(autouse=True)
def _reset_metrics() -> None:
    reset_metrics_recorder()
