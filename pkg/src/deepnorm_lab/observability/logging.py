"""Structured logging bootstrap and run-scoped context helpers."""

from __future__ import annotations

import contextvars
import json
import logging
import os
import sys
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from datetime import timezone as _timezone
from typing import Any, TextIO

UTC = _timezone.utc  # identical to datetime.UTC (3.11+); works on 3.10

_UNSET = object()

LEVEL_ENV_VAR = "DEEPNORM_LOG_LEVEL"
FORMAT_ENV_VAR = "DEEPNORM_LOG_FORMAT"

_RUN_ID_CTX: contextvars.ContextVar[str | None] = contextvars.ContextVar(
    "deepnorm_run_id",
    default=None,
)
_SCHEME_CTX: contextvars.ContextVar[str | None] = contextvars.ContextVar(
    "deepnorm_scheme",
    default=None,
)
_DEPTH_CTX: contextvars.ContextVar[int | None] = contextvars.ContextVar(
    "deepnorm_depth",
    default=None,
)
_SEED_CTX: contextvars.ContextVar[int | None] = contextvars.ContextVar(
    "deepnorm_seed",
    default=None,
)

_CONTEXT_KEYS = frozenset({"service", "run_id", "scheme", "depth", "seed"})


def _build_standard_record_keys() -> frozenset[str]:
    record_keys = set(logging.makeLogRecord({}).__dict__.keys())
    # Formatter-generated; taskName only exists on newer Pythons.
    record_keys.update({"asctime", "message", "taskName"})
    return frozenset(record_keys)


_STANDARD_RECORD_KEYS = _build_standard_record_keys()


@dataclass(frozen=True, slots=True)
class RunContext:
    """Identifiers of the training run or check currently being logged."""

    run_id: str | None = None
    scheme: str | None = None
    depth: int | None = None
    seed: int | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "scheme": self.scheme,
            "depth": self.depth,
            "seed": self.seed,
        }


class JsonFormatter(logging.Formatter):
    """One JSON object per record with service and run context fields."""

    def __init__(self, *, service: str) -> None:
        super().__init__()
        self._service = service

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": _format_timestamp(record.created),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "service": self._service,
            **get_run_context().as_dict(),
        }
        payload.update(_extract_extra_fields(record))
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str, ensure_ascii=True)


class TextFormatter(logging.Formatter):
    """Plain text formatter carrying the same run context."""

    def __init__(self, *, service: str) -> None:
        super().__init__("%(asctime)s %(levelname)s %(name)s %(message)s")
        self._service = service

    def format(self, record: logging.LogRecord) -> str:
        base = super().format(record)
        context = get_run_context()
        extras = " ".join(f"{key}={value}" for key, value in _extract_extra_fields(record).items())
        text = (
            f"{base} service={self._service} "
            f"run_id={context.run_id or '-'} scheme={context.scheme or '-'} "
            f"depth={_dash(context.depth)} seed={_dash(context.seed)}"
        )
        return f"{text} {extras}" if extras else text


def get_run_context() -> RunContext:
    return RunContext(
        run_id=_RUN_ID_CTX.get(),
        scheme=_SCHEME_CTX.get(),
        depth=_DEPTH_CTX.get(),
        seed=_SEED_CTX.get(),
    )


@contextmanager
def run_scope(
    *,
    run_id: str | None | object = _UNSET,
    scheme: str | None | object = _UNSET,
    depth: int | None | object = _UNSET,
    seed: int | None | object = _UNSET,
) -> Iterator[RunContext]:
    """Bind run identifiers for every record logged in the current context."""
    tokens: list[tuple[contextvars.ContextVar[Any], contextvars.Token[Any]]] = []
    for context_var, value in (
        (_RUN_ID_CTX, run_id),
        (_SCHEME_CTX, scheme),
        (_DEPTH_CTX, depth),
        (_SEED_CTX, seed),
    ):
        if value is not _UNSET:
            tokens.append((context_var, context_var.set(value)))
    try:
        yield get_run_context()
    finally:
        for context_var, token in reversed(tokens):
            context_var.reset(token)


class EventLogger:
    """Event-style logging over stdlib records.

    Accepts ``logger.info("run_diverged", step=12, loss=3.1e9)`` and
    ``logger.bind(suite="thm1").info("check_finished")``; keyword fields become
    record extras so both formatters render them.
    """

    __slots__ = ("_bound_fields", "_logger")

    def __init__(
        self,
        logger: logging.Logger,
        *,
        bound_fields: Mapping[str, Any] | None = None,
    ) -> None:
        self._logger = logger
        self._bound_fields = dict(bound_fields or {})

    @property
    def logger(self) -> logging.Logger:
        return self._logger

    @property
    def bound_fields(self) -> dict[str, Any]:
        return dict(self._bound_fields)

    def bind(self, **new_values: Any) -> EventLogger:
        merged = dict(self._bound_fields)
        merged.update(new_values)
        return EventLogger(self._logger, bound_fields=merged)

    def unbind(self, *keys: str) -> EventLogger:
        """Drop bound keys.

        Raises:
            KeyError: If any key is not currently bound.
        """
        merged = dict(self._bound_fields)
        for key in keys:
            del merged[key]
        return EventLogger(self._logger, bound_fields=merged)

    def debug(self, event: str, **fields: Any) -> None:
        self._emit(logging.DEBUG, event, fields)

    def info(self, event: str, **fields: Any) -> None:
        self._emit(logging.INFO, event, fields)

    def warning(self, event: str, **fields: Any) -> None:
        self._emit(logging.WARNING, event, fields)

    def error(self, event: str, **fields: Any) -> None:
        self._emit(logging.ERROR, event, fields)

    def exception(self, event: str, **fields: Any) -> None:
        fields.setdefault("exc_info", True)
        self._emit(logging.ERROR, event, fields)

    def _emit(self, level: int, event: str, fields: dict[str, Any]) -> None:
        if not self._logger.isEnabledFor(level):
            return
        merged = dict(self._bound_fields)
        merged.update(fields)
        exc_info = merged.pop("exc_info", None)
        merged["event"] = event
        log_kwargs: dict[str, Any] = {"stacklevel": 3, "extra": _sanitize_extra(merged)}
        if exc_info is not None:
            log_kwargs["exc_info"] = exc_info
        self._logger.log(level, event, **log_kwargs)


def get_event_logger(name: str, **bound_fields: Any) -> EventLogger:
    return EventLogger(logging.getLogger(name), bound_fields=bound_fields)


def bootstrap_logging(
    *,
    service: str = "deepnorm-lab",
    level: str | None = None,
    log_format: str | None = None,
    logger: logging.Logger | None = None,
    stream: TextIO | None = None,
    force: bool = True,
) -> logging.Logger:
    """Install a JSON or text handler; records go to ``stderr`` unless ``stream`` is given.

    ``level`` and ``log_format`` fall back to ``DEEPNORM_LOG_LEVEL`` and
    ``DEEPNORM_LOG_FORMAT``, then to ``INFO`` and ``json``.
    """
    resolved_level = (level or os.getenv(LEVEL_ENV_VAR) or "INFO").upper()
    resolved_format = (log_format or os.getenv(FORMAT_ENV_VAR) or "json").lower()
    target_logger = logger or logging.getLogger()

    if force:
        for handler in list(target_logger.handlers):
            target_logger.removeHandler(handler)

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(_build_formatter(resolved_format, service=service))
    target_logger.addHandler(handler)
    target_logger.setLevel(resolved_level)
    if target_logger is not logging.getLogger():
        target_logger.propagate = False
    return target_logger


def _build_formatter(log_format: str, *, service: str) -> logging.Formatter:
    if log_format == "text":
        return TextFormatter(service=service)
    return JsonFormatter(service=service)


def _sanitize_extra(fields: Mapping[str, Any]) -> dict[str, Any]:
    safe: dict[str, Any] = {}
    collisions: dict[str, Any] = {}
    for key, value in fields.items():
        if key in _STANDARD_RECORD_KEYS or key in _CONTEXT_KEYS:
            collisions[key] = value
        else:
            safe[key] = value
    if collisions:
        safe["field_conflicts"] = collisions
    return safe


def _extract_extra_fields(record: logging.LogRecord) -> dict[str, Any]:
    return {
        key: value
        for key, value in record.__dict__.items()
        if key not in _STANDARD_RECORD_KEYS
        and not key.startswith("_")
        and key not in _CONTEXT_KEYS
    }


def _dash(value: object | None) -> str:
    return "-" if value is None else str(value)


def _format_timestamp(created: float) -> str:
    timestamp = datetime.fromtimestamp(created, tz=UTC)
    return timestamp.isoformat(timespec="milliseconds").replace("+00:00", "Z")
