"""DeepNorm stability lab: gains, tiny Transformers, update bounds and training sweeps."""

from deepnorm_lab.config import (
    ArchShape,
    ConfigError,
    ConfigValidationError,
    ExperimentConfig,
    ModelConfig,
    TrainConfig,
    VerifyConfig,
    load_experiment_config,
    load_verify_config,
)
from deepnorm_lab.experiments import fit_log_scaling, run_suite, run_sweep
from deepnorm_lab.model import TransformerModel, build_model, model_forward
from deepnorm_lab.norm import GainSpec, NormScheme, compute_gains
from deepnorm_lab.observability import bootstrap_logging, get_event_logger, run_scope
from deepnorm_lab.runtime import (
    AssumptionError,
    DeepNormLabError,
    DimensionError,
    FitError,
    InputError,
    generator_for,
)
from deepnorm_lab.theory import (
    BoundReport,
    ScalarModel,
    scalar_forward,
    theorem1_bound,
    theorem2_bound,
    verify_theorem1,
    verify_theorem2,
)
from deepnorm_lab.training import RunTrace, train_run

__all__ = [
    "ArchShape",
    "AssumptionError",
    "BoundReport",
    "ConfigError",
    "ConfigValidationError",
    "DeepNormLabError",
    "DimensionError",
    "ExperimentConfig",
    "FitError",
    "GainSpec",
    "InputError",
    "ModelConfig",
    "NormScheme",
    "RunTrace",
    "ScalarModel",
    "TrainConfig",
    "TransformerModel",
    "VerifyConfig",
    "bootstrap_logging",
    "build_model",
    "compute_gains",
    "fit_log_scaling",
    "generator_for",
    "get_event_logger",
    "load_experiment_config",
    "load_verify_config",
    "model_forward",
    "run_scope",
    "run_suite",
    "run_sweep",
    "scalar_forward",
    "theorem1_bound",
    "theorem2_bound",
    "train_run",
    "verify_theorem1",
    "verify_theorem2",
]
