"""Errors raised while reading experiment, verification and points documents."""

from __future__ import annotations

from deepnorm_lab.runtime.errors import DeepNormLabError


class ConfigError(DeepNormLabError):
    """Invalid configuration: a bad document, missing layer counts or gains."""


class ConfigFileNotFoundError(ConfigError, FileNotFoundError):
    """A document path given on the command line does not exist."""

    def __init__(self, path: str) -> None:
        self.path = path
        super().__init__(f"Document not found: {path}")


class MalformedDocumentError(ConfigError):
    """A document is not JSON, or not the JSON shape its command expects."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class ConfigValidationError(ConfigError):
    """Schema validation failed; ``errors`` holds ``{"loc", "msg"}`` pairs."""

    def __init__(self, errors: list[dict[str, str]], document: str | None = None) -> None:
        self.errors = errors
        self.document = document
        lines = [f"  - {err.get('loc', '?')}: {err.get('msg', 'invalid')}" for err in errors]
        where = f" in {document}" if document else ""
        super().__init__(f"Invalid document{where}:\n" + "\n".join(lines))


class PlaceholderResolutionError(ConfigError):
    """``${VAR}`` has no environment value and no ``:-default``."""

    def __init__(self, placeholder: str, key_path: str) -> None:
        self.placeholder = placeholder
        self.key_path = key_path
        super().__init__(f"Unset variable {placeholder} referenced at '{key_path}'")
