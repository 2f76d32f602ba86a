"""Configuration loading and validation module."""

from deepnorm_lab.config.errors import (
    ConfigError,
    ConfigFileNotFoundError,
    ConfigValidationError,
    MalformedDocumentError,
    PlaceholderResolutionError,
)
from deepnorm_lab.config.loader import (
    deep_merge,
    load_document,
    load_experiment_config,
    load_verify_config,
    validate_model,
)
from deepnorm_lab.config.models import (
    SCHEME_PRESETS,
    ArchKind,
    ArchShape,
    ExperimentConfig,
    GainForm,
    InitScheme,
    LoggingSettings,
    ModelConfig,
    ModelSection,
    NormVariant,
    OptimizerConfig,
    ScheduleConfig,
    SweepAxes,
    TaskSpec,
    TrainConfig,
    VerifyConfig,
)

__all__ = [
    "SCHEME_PRESETS",
    "ArchKind",
    "ArchShape",
    "ConfigError",
    "ConfigFileNotFoundError",
    "ConfigValidationError",
    "ExperimentConfig",
    "GainForm",
    "InitScheme",
    "LoggingSettings",
    "MalformedDocumentError",
    "ModelConfig",
    "ModelSection",
    "NormVariant",
    "OptimizerConfig",
    "PlaceholderResolutionError",
    "ScheduleConfig",
    "SweepAxes",
    "TaskSpec",
    "TrainConfig",
    "VerifyConfig",
    "deep_merge",
    "load_document",
    "load_experiment_config",
    "load_verify_config",
    "validate_model",
]
