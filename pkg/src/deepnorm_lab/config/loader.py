"""Experiment document loader with override merge and validation."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from deepnorm_lab.config.errors import (
    ConfigFileNotFoundError,
    ConfigValidationError,
    MalformedDocumentError,
)
from deepnorm_lab.config.models import ExperimentConfig, VerifyConfig
from deepnorm_lab.config.placeholders import resolve_placeholders

ENV_VAR_NAME = "DEEPNORM_ENV"

ModelT = TypeVar("ModelT", bound=BaseModel)


def deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Deep merge two dictionaries. Override values take precedence.

    Args:
        base: Base dictionary.
        override: Override dictionary (values take precedence).

    Returns:
        New merged dictionary.
    """
    result = base.copy()

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value

    return result


def load_json_file(path: Path) -> dict[str, Any]:
    """Load and parse a JSON document that must be an object.

    Raises:
        ConfigFileNotFoundError: If the file does not exist.
        MalformedDocumentError: If the file is not valid JSON or not an object.
    """
    if not path.exists():
        raise ConfigFileNotFoundError(str(path))

    try:
        with path.open(encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(str(path), f"Malformed JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedDocumentError(str(path), "expected a JSON object")
    return payload


def validate_model(
    model_type: type[ModelT], payload: dict[str, Any], *, document: str | None = None
) -> ModelT:
    """Validate ``payload`` and translate pydantic errors into ``ConfigValidationError``."""
    try:
        return model_type.model_validate(payload)
    except ValidationError as e:
        errors = [
            {"loc": " -> ".join(str(loc) for loc in err["loc"]), "msg": err["msg"]}
            for err in e.errors()
        ]
        raise ConfigValidationError(errors, document) from e


def load_document(
    path: Path | str,
    *,
    env: str | None = None,
    strict_placeholders: bool = True,
) -> dict[str, Any]:
    """Read ``path``, merge ``<stem>.<env>.json`` when present, resolve placeholders.

    The environment defaults to ``DEEPNORM_ENV``; no override is applied when
    neither is set.
    """
    path = Path(path)
    document = load_json_file(path)

    if env is None:
        env = os.environ.get(ENV_VAR_NAME)
    if env:
        env_path = path.with_name(f"{path.stem}.{env}{path.suffix}")
        if env_path.exists():
            document = deep_merge(document, load_json_file(env_path))

    return resolve_placeholders(document, strict=strict_placeholders)


def load_experiment_config(path: Path | str, *, env: str | None = None) -> ExperimentConfig:
    """Load and validate a ``train`` experiment document."""
    return validate_model(ExperimentConfig, load_document(path, env=env), document=str(path))


def load_verify_config(path: Path | str | None, *, env: str | None = None) -> VerifyConfig:
    """Load a ``verify`` document; ``None`` yields the default protocol."""
    if path is None:
        return VerifyConfig()
    return validate_model(VerifyConfig, load_document(path, env=env), document=str(path))
