"""Runtime primitives: exceptions and deterministic random streams."""

from deepnorm_lab.runtime.errors import (
    AssumptionError,
    DeepNormLabError,
    DimensionError,
    FitError,
    InputError,
    LayerIndexError,
    MissingDependencyError,
    OracleError,
    SweepError,
)
from deepnorm_lab.runtime.rng import RngStream, derive_key, generator_for

__all__ = [
    "AssumptionError",
    "DeepNormLabError",
    "DimensionError",
    "FitError",
    "InputError",
    "LayerIndexError",
    "MissingDependencyError",
    "OracleError",
    "RngStream",
    "SweepError",
    "derive_key",
    "generator_for",
]
