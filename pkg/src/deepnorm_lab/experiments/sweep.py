"""Scheme x depth x seed (x warmup) training sweeps on a bounded worker pool."""

from __future__ import annotations

import asyncio
import json
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter
from typing import Any

from deepnorm_lab.config.models import (
    SCHEME_PRESETS,
    ArchShape,
    ExperimentConfig,
    InitScheme,
    ModelConfig,
    NormVariant,
    ScheduleConfig,
    TrainConfig,
)
from deepnorm_lab.observability.logging import get_event_logger, run_scope
from deepnorm_lab.observability.metrics import MetricsRecorder
from deepnorm_lab.runtime.errors import InputError, SweepError
from deepnorm_lab.training.diagnostics import ln_input_growth
from deepnorm_lab.training.loop import train_run

WORKERS_ENV_VAR = "DEEPNORM_WORKERS"
INDEX_FILE = "index.json"
INDEX_SCHEMA_VERSION = 1

_logger = get_event_logger(__name__)


@dataclass(frozen=True, slots=True)
class SweepRun:
    """One cell of the sweep grid."""

    scheme: str
    norm: NormVariant
    init: InitScheme
    depth: int
    seed: int
    warmup: int | None = None

    @property
    def stem(self) -> str:
        stem = f"{self.scheme}_d{self.depth}_s{self.seed}"
        return stem if self.warmup is None else f"{stem}_w{self.warmup}"

    def model_config(self, experiment: ExperimentConfig) -> ModelConfig:
        section = experiment.model
        return ModelConfig(
            arch=ArchShape.with_depth(section.kind, self.depth),
            d_model=section.d_model,
            n_heads=section.n_heads,
            d_ffn=section.d_ffn,
            vocab_size=experiment.train.task.vocab_size,
            max_seq_len=section.max_seq_len,
            norm=self.norm,
            init=self.init,
            gain_form=section.gain_form,
            ln_eps=section.ln_eps,
            ln_affine=section.ln_affine,
            dropout=section.dropout,
            seed=self.seed,
        )

    def train_config(self, experiment: ExperimentConfig) -> TrainConfig:
        train = experiment.train
        if self.warmup is None:
            return train.model_copy(update={"seed": self.seed})
        schedule = ScheduleConfig(
            kind="inverse_sqrt",
            warmup_steps=self.warmup,
            warmup_init_lr=train.schedule.warmup_init_lr,
        )
        return train.model_copy(update={"seed": self.seed, "schedule": schedule})


def required_seq_len(experiment: ExperimentConfig) -> int:
    """Longest token sequence a model of the configured kind reads."""
    seq_len = experiment.train.task.seq_len
    return 2 * seq_len - 1 if experiment.model.kind == "decoder_only" else seq_len


def expand_sweep(experiment: ExperimentConfig) -> list[SweepRun]:
    """Grid cells in scheme, depth, seed, warmup order.

    Raises:
        InputError: If the task does not fit ``max_seq_len``.
    """
    needed = required_seq_len(experiment)
    if needed > experiment.model.max_seq_len:
        raise InputError(
            f"task needs sequences of length {needed}, "
            f"max_seq_len is {experiment.model.max_seq_len}"
        )
    axes = experiment.sweep
    warmups: Sequence[int | None] = axes.warmups if axes.warmups is not None else [None]
    runs = []
    for scheme in axes.schemes:
        norm, init = SCHEME_PRESETS[scheme]
        for depth in axes.depths:
            for seed in axes.seeds:
                for warmup in warmups:
                    runs.append(SweepRun(scheme, norm, init, depth, seed, warmup))
    return runs


def resolve_workers(explicit: int | None = None) -> int:
    """Worker count from ``explicit``, else ``DEEPNORM_WORKERS``, else 1."""
    if explicit is not None:
        value: int | str = explicit
    else:
        value = os.getenv(WORKERS_ENV_VAR, "1")
    try:
        workers = int(value)
    except ValueError as exc:
        raise InputError(f"{WORKERS_ENV_VAR} must be an integer, got {value!r}") from exc
    if workers < 1:
        raise InputError(f"worker count must be >= 1, got {workers}")
    return workers


def execute_run(
    experiment: ExperimentConfig,
    run: SweepRun,
    out_dir: Path,
    *,
    recorder: MetricsRecorder | None = None,
) -> dict[str, Any]:
    """Train one grid cell and write ``<stem>.csv`` / ``<stem>.json``; returns its index entry."""
    with run_scope(run_id=run.stem, scheme=run.scheme, depth=run.depth, seed=run.seed):
        trace = train_run(
            run.model_config(experiment),
            run.train_config(experiment),
            label=run.scheme,
            recorder=recorder,
        )
        csv_path, json_path = trace.write(out_dir, run.stem)
    return {
        "run_id": run.stem,
        "scheme": run.scheme,
        "norm": run.norm,
        "init": run.init,
        "depth": run.depth,
        "seed": run.seed,
        "warmup": run.warmup,
        "csv": csv_path.name,
        "summary": json_path.name,
        "diverged": trace.diverged,
        "divergence_step": trace.divergence_step,
        "converged": trace.converged(),
        "initial_loss": _json_float(trace.initial_loss),
        "final_loss": _json_float(trace.final_loss),
        "peak_model_update": _peak(trace.model_updates),
        "final_model_update": _json_float(trace.model_updates[-1] if trace.model_updates else None),
        "ln_input_growth": ln_input_growth(trace),
    }


def _peak(values: Sequence[float]) -> float | None:
    finite = [value for value in values if math.isfinite(value)]
    return max(finite) if finite else None


async def run_sweep(
    experiment: ExperimentConfig,
    out_dir: str | Path,
    *,
    workers: int | None = None,
    recorder: MetricsRecorder | None = None,
) -> dict[str, Any]:
    """Run every grid cell, at most ``workers`` at a time, then write ``index.json`` once.

    Each worker owns its run's output files. Entries appear in grid order no
    matter which run finishes first.

    Raises:
        SweepError: If any run raised; the index is not written.
    """
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    runs = expand_sweep(experiment)
    limit = resolve_workers(workers)
    semaphore = asyncio.Semaphore(limit)
    started = perf_counter()
    _logger.info("sweep_started", name=experiment.name, runs=len(runs), workers=limit)

    async def _run(run: SweepRun) -> dict[str, Any]:
        async with semaphore:
            return await asyncio.to_thread(
                execute_run, experiment, run, target, recorder=recorder
            )

    results = await asyncio.gather(*(_run(run) for run in runs), return_exceptions=True)

    errors: dict[str, Exception] = {}
    entries: list[dict[str, Any]] = []
    for run, result in zip(runs, results, strict=True):
        if isinstance(result, Exception):
            errors[run.stem] = result
        elif isinstance(result, BaseException):
            raise result
        else:
            entries.append(result)
    if errors:
        _logger.error("sweep_failed", failed=sorted(errors))
        raise SweepError(errors)

    index = {
        "schema_version": INDEX_SCHEMA_VERSION,
        "name": experiment.name,
        "runs": entries,
        "summary": summarize_sweep(entries),
    }
    payload = json.dumps(index, indent=2, sort_keys=True, default=_json_default)
    (target / INDEX_FILE).write_text(payload + "\n", encoding="utf-8")
    _logger.info(
        "sweep_finished",
        runs=len(entries),
        diverged=sum(1 for entry in entries if entry["diverged"]),
        elapsed_ms=round((perf_counter() - started) * 1000, 3),
    )
    return index


def summarize_sweep(entries: Sequence[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Converged / diverged seed counts per ``(scheme, init, warmup, depth)``.

    Groups are sorted, so the result does not depend on entry order.
    """
    groups: dict[tuple[str, str, int, int], dict[str, int]] = {}
    for entry in entries:
        warmup = entry.get("warmup")
        key = (
            str(entry["scheme"]),
            str(entry["init"]),
            -1 if warmup is None else int(warmup),
            int(entry["depth"]),
        )
        counts = groups.setdefault(key, {"runs": 0, "converged": 0, "diverged": 0})
        counts["runs"] += 1
        counts["converged"] += int(bool(entry.get("converged")))
        counts["diverged"] += int(bool(entry.get("diverged")))
    return [
        {
            "scheme": scheme,
            "init": init,
            "warmup": None if warmup < 0 else warmup,
            "depth": depth,
            **counts,
        }
        for (scheme, init, warmup, depth), counts in sorted(groups.items())
    ]


def _json_float(value: float | None) -> float | str | None:
    if value is None or math.isfinite(value):
        return value
    return str(value)


def _json_default(value: Any) -> Any:
    return str(value)
