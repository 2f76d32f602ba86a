"""Structured logging and optional Prometheus metrics."""

from deepnorm_lab.observability.logging import (
    EventLogger,
    JsonFormatter,
    RunContext,
    TextFormatter,
    bootstrap_logging,
    get_event_logger,
    get_run_context,
    run_scope,
)
from deepnorm_lab.observability.metrics import (
    MetricsRecorder,
    NoopMetricsRecorder,
    PrometheusMetricsRecorder,
    get_metrics_recorder,
    reset_metrics_recorder,
    set_metrics_recorder,
)

__all__ = [
    "EventLogger",
    "JsonFormatter",
    "MetricsRecorder",
    "NoopMetricsRecorder",
    "PrometheusMetricsRecorder",
    "RunContext",
    "TextFormatter",
    "bootstrap_logging",
    "get_event_logger",
    "get_metrics_recorder",
    "get_run_context",
    "reset_metrics_recorder",
    "run_scope",
    "set_metrics_recorder",
]
