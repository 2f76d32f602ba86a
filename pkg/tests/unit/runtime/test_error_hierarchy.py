"""Tests for unified exception hierarchy."""

from __future__ import annotations

import pytest

from deepnorm_lab.config.errors import (
    ConfigError,
    ConfigFileNotFoundError,
    ConfigValidationError,
    MalformedDocumentError,
    PlaceholderResolutionError,
)
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


class TestExceptionHierarchy:
    """Every package exception inherits from DeepNormLabError."""

    @pytest.mark.parametrize(
        "error",
        [
            ConfigError("bad"),
            ConfigFileNotFoundError("missing.json"),
            ConfigValidationError([]),
            MalformedDocumentError("points.json", "not a list"),
            PlaceholderResolutionError("${VAR}", "train.seed"),
            MissingDependencyError("prometheus-client"),
            DimensionError("shape"),
            LayerIndexError("layer"),
            InputError("token"),
            OracleError("nan"),
            FitError("points"),
            AssumptionError("alpha"),
            SweepError({}),
        ],
    )
    def test_is_deepnorm_lab_error(self, error: Exception) -> None:
        assert isinstance(error, DeepNormLabError)

    def test_value_errors_stay_catchable_as_builtins(self) -> None:
        assert isinstance(DimensionError("x"), ValueError)
        assert isinstance(InputError("x"), ValueError)
        assert isinstance(AssumptionError("x"), ValueError)
        assert isinstance(LayerIndexError("x"), IndexError)
        assert isinstance(ConfigFileNotFoundError("x.json"), FileNotFoundError)

    def test_catch_config_error_with_base(self) -> None:
        """Ensure except DeepNormLabError catches ConfigError."""
        with pytest.raises(DeepNormLabError):
            raise ConfigError("test")


def test_validation_error_message_lists_locations() -> None:
    error = ConfigValidationError([{"loc": "train -> lr", "msg": "must be >= 0"}])

    assert "train -> lr: must be >= 0" in str(error)
    assert error.errors == [{"loc": "train -> lr", "msg": "must be >= 0"}]


def test_sweep_error_names_failed_runs() -> None:
    error = SweepError({"post_ln_d6_s0": RuntimeError("boom"), "deepnorm_d6_s1": ValueError()})

    assert str(error) == "Sweep runs failed: post_ln_d6_s0, deepnorm_d6_s1"
    assert set(error.errors) == {"post_ln_d6_s0", "deepnorm_d6_s1"}


def test_validation_error_names_the_document() -> None:
    error = ConfigValidationError([{"loc": "steps", "msg": "bad"}], "sweep.json")

    assert str(error).startswith("Invalid document in sweep.json:")
    assert error.document == "sweep.json"


def test_malformed_document_keeps_path_and_reason() -> None:
    error = MalformedDocumentError("points.json", "expected a JSON object")

    assert str(error) == "points.json: expected a JSON object"
    assert (error.path, error.reason) == ("points.json", "expected a JSON object")
