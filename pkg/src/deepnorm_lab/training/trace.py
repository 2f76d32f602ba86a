"""Per-run training traces and their CSV / JSON serialization.

CSV schema version 1, one row per record:

``step, loss, lr, model_update`` followed by one
``grad_norm_<component>_<layer>_<sublayer>`` column per sub-layer and one
``ln_input_<component>_<layer>_<sublayer>`` column per LayerNorm, both in
theta order, and a trailing ``train_loss``. ``loss`` is the held-out probe
loss; ``train_loss`` is the loss of the batch the step trained on (the probe
loss at step 0).
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

CSV_SCHEMA_VERSION = 1
BASE_COLUMNS = ("step", "loss", "lr", "model_update")
TRAILING_COLUMNS = ("train_loss",)


@dataclass(slots=True)
class TraceRecord:
    step: int
    loss: float
    train_loss: float
    lr: float
    model_update: float
    grad_norms: dict[str, float] = field(default_factory=dict)
    ln_inputs: dict[str, float] = field(default_factory=dict)


@dataclass(slots=True)
class RunTrace:
    """Recorded series of one run plus its divergence outcome."""

    sublayers: list[str]
    d_model: int
    records: list[TraceRecord] = field(default_factory=list)
    diverged: bool = False
    divergence_step: int | None = None
    steps_completed: int = 0
    label: str = ""

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def mark_diverged(self, step: int) -> None:
        self.diverged = True
        self.divergence_step = step

    @property
    def steps(self) -> list[int]:
        return [record.step for record in self.records]

    @property
    def losses(self) -> list[float]:
        return [record.loss for record in self.records]

    @property
    def model_updates(self) -> list[float]:
        return [record.model_update for record in self.records]

    @property
    def initial_loss(self) -> float | None:
        return self.records[0].loss if self.records else None

    @property
    def final_loss(self) -> float | None:
        return self.records[-1].loss if self.records else None

    def grad_series(self, sublayer: str) -> list[float]:
        return [record.grad_norms.get(sublayer, math.nan) for record in self.records]

    def ln_series(self, sublayer: str) -> list[float]:
        return [record.ln_inputs.get(sublayer, math.nan) for record in self.records]

    def ln_columns(self) -> list[str]:
        seen: list[str] = []
        for record in self.records:
            for name in record.ln_inputs:
                if name not in seen:
                    seen.append(name)
        return [name for name in self.sublayers if name in seen]

    def converged(self, factor: float = 0.1) -> bool:
        """Not diverged and the final probe loss is below ``factor`` times the initial one."""
        if self.diverged or self.initial_loss is None or self.final_loss is None:
            return False
        return math.isfinite(self.final_loss) and self.final_loss < factor * self.initial_loss

    def columns(self) -> list[str]:
        return [
            *BASE_COLUMNS,
            *(f"grad_norm_{name}" for name in self.sublayers),
            *(f"ln_input_{name}" for name in self.ln_columns()),
            *TRAILING_COLUMNS,
        ]

    def rows(self) -> Iterable[list[Any]]:
        ln_names = self.ln_columns()
        for record in self.records:
            yield [
                record.step,
                record.loss,
                record.lr,
                record.model_update,
                *(record.grad_norms.get(name, math.nan) for name in self.sublayers),
                *(record.ln_inputs.get(name, math.nan) for name in ln_names),
                record.train_loss,
            ]

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.columns())
        for row in self.rows():
            writer.writerow([repr(value) if isinstance(value, float) else value for value in row])

    def per_layer_summary(self) -> dict[str, dict[str, float]]:
        summary: dict[str, dict[str, float]] = {}
        for name in self.sublayers:
            grads = [g for g in self.grad_series(name) if math.isfinite(g)]
            lns = [x for x in self.ln_series(name) if math.isfinite(x)]
            entry: dict[str, float] = {}
            if grads:
                entry["grad_norm_first"] = grads[0]
                entry["grad_norm_last"] = grads[-1]
                entry["grad_norm_max"] = max(grads)
            if lns:
                entry["ln_input_max"] = max(lns)
                entry["ln_input_last"] = lns[-1]
            summary[name] = entry
        return summary

    def summary(self) -> dict[str, Any]:
        return {
            "schema_version": CSV_SCHEMA_VERSION,
            "label": self.label,
            "diverged": self.diverged,
            "divergence_step": self.divergence_step,
            "steps_completed": self.steps_completed,
            "initial_loss": _json_float(self.initial_loss),
            "final_loss": _json_float(self.final_loss),
            "converged": self.converged(),
            "records": len(self.records),
            "per_layer": {
                name: {key: _json_float(value) for key, value in entry.items()}
                for name, entry in self.per_layer_summary().items()
            },
        }

    def write(self, directory: str | Path, stem: str) -> tuple[Path, Path]:
        """Write ``<stem>.csv`` and ``<stem>.json`` under ``directory``."""
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        csv_path = target / f"{stem}.csv"
        json_path = target / f"{stem}.json"
        with csv_path.open("w", encoding="utf-8", newline="") as handle:
            self.write_csv(handle)
        payload = json.dumps(self.summary(), indent=2, sort_keys=True)
        json_path.write_text(payload + "\n", encoding="utf-8")
        return csv_path, json_path


def _json_float(value: float | None) -> float | str | None:
    if value is None:
        return None
    if math.isfinite(value):
        return value
    return str(value)
