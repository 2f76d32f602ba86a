"""Prometheus metrics for training runs and verification checks."""

from __future__ import annotations

import math
import re
import threading
from typing import Any, Protocol

from deepnorm_lab.runtime.errors import MissingDependencyError

_LABEL_NORMALIZER = re.compile(r"[^a-zA-Z0-9_]+")

_STEP_BUCKETS = (0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0)


def _import_prometheus_client() -> Any:
    try:
        import prometheus_client
    except ImportError as exc:  # pragma: no cover - depends on optional extras
        raise MissingDependencyError(
            "Prometheus metrics require optional dependency 'prometheus-client'. "
            "Install with: pip install 'deepnorm-lab[observability]'"
        ) from exc
    return prometheus_client


def _sanitize_label(value: str, *, default: str = "unknown") -> str:
    normalized = _LABEL_NORMALIZER.sub("_", value.strip().lower()).strip("_")
    return normalized or default


def _collector_or_create(registry: Any, name: str, factory: Any) -> Any:
    names_to_collectors = getattr(registry, "_names_to_collectors", None)
    if isinstance(names_to_collectors, dict):
        collector = names_to_collectors.get(name)
        if collector is not None:
            return collector
    return factory()


class MetricsRecorder(Protocol):
    """Observer contract for training and verification metrics."""

    def observe_step(self, *, scheme: str, loss: float, duration_seconds: float) -> None:
        """Record one optimizer step."""
        ...

    def observe_divergence(self, *, scheme: str) -> None:
        """Record a diverged run."""
        ...

    def observe_check(self, *, suite: str, passed: bool) -> None:
        """Record one verification check outcome."""
        ...


class NoopMetricsRecorder:
    """Default recorder; drops every observation."""

    def observe_step(self, *, scheme: str, loss: float, duration_seconds: float) -> None:
        return None

    def observe_divergence(self, *, scheme: str) -> None:
        return None

    def observe_check(self, *, suite: str, passed: bool) -> None:
        return None


class PrometheusMetricsRecorder:
    """Prometheus-backed recorder with ``deepnorm_*`` naming."""

    def __init__(self, *, registry: Any | None = None, prefix: str = "deepnorm") -> None:
        prometheus_client = _import_prometheus_client()
        self._registry = prometheus_client.REGISTRY if registry is None else registry
        self._prefix = _sanitize_label(prefix, default="deepnorm")
        p = self._prefix
        self._steps = _collector_or_create(
            self._registry,
            f"{p}_train_steps_total",
            lambda: prometheus_client.Counter(
                f"{p}_train_steps_total",
                "Optimizer steps taken.",
                labelnames=("scheme",),
                registry=self._registry,
            ),
        )
        self._step_seconds = _collector_or_create(
            self._registry,
            f"{p}_train_step_seconds",
            lambda: prometheus_client.Histogram(
                f"{p}_train_step_seconds",
                "Wall time of one optimizer step in seconds.",
                labelnames=("scheme",),
                registry=self._registry,
                buckets=_STEP_BUCKETS,
            ),
        )
        self._loss = _collector_or_create(
            self._registry,
            f"{p}_train_loss",
            lambda: prometheus_client.Gauge(
                f"{p}_train_loss",
                "Most recent training loss.",
                labelnames=("scheme",),
                registry=self._registry,
            ),
        )
        self._diverged = _collector_or_create(
            self._registry,
            f"{p}_runs_diverged_total",
            lambda: prometheus_client.Counter(
                f"{p}_runs_diverged_total",
                "Training runs that diverged.",
                labelnames=("scheme",),
                registry=self._registry,
            ),
        )
        self._checks = _collector_or_create(
            self._registry,
            f"{p}_checks_total",
            lambda: prometheus_client.Counter(
                f"{p}_checks_total",
                "Verification checks by outcome.",
                labelnames=("suite", "status"),
                registry=self._registry,
            ),
        )

    def observe_step(self, *, scheme: str, loss: float, duration_seconds: float) -> None:
        label = _sanitize_label(scheme)
        self._steps.labels(scheme=label).inc()
        self._step_seconds.labels(scheme=label).observe(max(0.0, duration_seconds))
        if math.isfinite(loss):
            self._loss.labels(scheme=label).set(loss)

    def observe_divergence(self, *, scheme: str) -> None:
        self._diverged.labels(scheme=_sanitize_label(scheme)).inc()

    def observe_check(self, *, suite: str, passed: bool) -> None:
        self._checks.labels(
            suite=_sanitize_label(suite),
            status="passed" if passed else "failed",
        ).inc()


_NOOP_RECORDER = NoopMetricsRecorder()
_DEFAULT_RECORDER: MetricsRecorder = _NOOP_RECORDER
_METRICS_LOCK = threading.Lock()


def get_metrics_recorder() -> MetricsRecorder:
    """Return the process-level metrics recorder."""
    with _METRICS_LOCK:
        return _DEFAULT_RECORDER


def set_metrics_recorder(recorder: MetricsRecorder | None) -> MetricsRecorder:
    """Set the process-level recorder; ``None`` switches back to no-op."""
    global _DEFAULT_RECORDER
    with _METRICS_LOCK:
        _DEFAULT_RECORDER = _NOOP_RECORDER if recorder is None else recorder
        return _DEFAULT_RECORDER


def reset_metrics_recorder() -> None:
    set_metrics_recorder(None)
