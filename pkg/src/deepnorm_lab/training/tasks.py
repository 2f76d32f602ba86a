"""Synthetic copy / reverse / sort sequence tasks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from deepnorm_lab.config.models import ArchKind, TaskSpec
from deepnorm_lab.model.transformer import BOS_TOKEN


@dataclass(frozen=True, slots=True)
class TaskBatch:
    """Source and target token ids, both ``(batch, seq_len)``."""

    src: np.ndarray
    tgt: np.ndarray

    @property
    def size(self) -> int:
        return int(self.src.shape[0])


@dataclass(frozen=True, slots=True)
class ModelInputs:
    """What a model of a given kind reads, and which logits are scored.

    ``offset`` is the first decoder position whose logits predict ``targets``.
    """

    src: np.ndarray | None
    tgt: np.ndarray | None
    targets: np.ndarray
    offset: int = 0


def _targets(kind: str, src: np.ndarray) -> np.ndarray:
    if kind == "copy":
        return src.copy()
    if kind == "reverse":
        return src[:, ::-1].copy()
    return np.sort(src, axis=1)


def make_batch(task: TaskSpec, rng: np.random.Generator, batch_size: int = 1) -> TaskBatch:
    """Uniform tokens from ``[1, vocab_size)``; id 0 is the decoder start token."""
    src = rng.integers(BOS_TOKEN + 1, task.vocab_size, size=(batch_size, task.seq_len))
    return TaskBatch(src=src.astype(np.int64), tgt=_targets(task.kind, src).astype(np.int64))


def targets_for(task: TaskSpec, src: np.ndarray | list[int]) -> np.ndarray:
    ids = np.atleast_2d(np.asarray(src, dtype=np.int64))
    return _targets(task.kind, ids)


def model_inputs(kind: ArchKind, batch: TaskBatch) -> ModelInputs:
    """Lay a batch out for ``kind``.

    encoder_only labels every source position with its target token;
    decoder_only reads ``src ++ tgt[:-1]`` causally and is scored on the last
    ``seq_len`` positions; encoder_decoder feeds ``BOS ++ tgt[:-1]`` with
    teacher forcing.
    """
    if kind == "encoder_only":
        return ModelInputs(src=batch.src, tgt=None, targets=batch.tgt)
    if kind == "decoder_only":
        sequence = np.concatenate([batch.src, batch.tgt], axis=1)
        return ModelInputs(
            src=None,
            tgt=sequence[:, :-1],
            targets=batch.tgt,
            offset=batch.src.shape[1] - 1,
        )
    start = np.full((batch.size, 1), BOS_TOKEN, dtype=np.int64)
    shifted = np.concatenate([start, batch.tgt[:, :-1]], axis=1)
    return ModelInputs(src=batch.src, tgt=shifted, targets=batch.tgt)
