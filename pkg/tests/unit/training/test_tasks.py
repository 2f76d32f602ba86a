"""Tests for synthetic tasks and their per-architecture layout."""

from __future__ import annotations

import numpy as np
import pytest

from deepnorm_lab.config.models import TaskSpec
from deepnorm_lab.model.transformer import BOS_TOKEN
from deepnorm_lab.runtime.rng import generator_for
from deepnorm_lab.training.tasks import TaskBatch, make_batch, model_inputs, targets_for


@pytest.mark.parametrize("kind", ["copy", "reverse", "sort"])
def test_tokens_avoid_the_start_token(kind: str) -> None:
    batch = make_batch(TaskSpec(kind=kind, vocab_size=5, seq_len=12), generator_for(0, "data"), 8)

    assert batch.src.shape == batch.tgt.shape == (8, 12)
    assert batch.src.min() >= 1
    assert batch.src.max() < 5
    assert batch.size == 8


def test_targets_per_task() -> None:
    src = np.array([[3, 1, 2]])

    assert targets_for(TaskSpec(kind="copy"), src).tolist() == [[3, 1, 2]]
    assert targets_for(TaskSpec(kind="reverse"), src).tolist() == [[2, 1, 3]]
    assert targets_for(TaskSpec(kind="sort"), [3, 1, 2]).tolist() == [[1, 2, 3]]


def test_same_stream_gives_same_batch() -> None:
    task = TaskSpec(vocab_size=9, seq_len=6)

    first = make_batch(task, generator_for(2, "data"), 4)
    second = make_batch(task, generator_for(2, "data"), 4)

    assert np.array_equal(first.src, second.src)


class TestModelInputs:
    """Layout of one batch for each architecture."""

    batch = TaskBatch(src=np.array([[4, 5, 6]]), tgt=np.array([[6, 5, 4]]))

    def test_encoder_only_labels_source_positions(self) -> None:
        inputs = model_inputs("encoder_only", self.batch)

        assert inputs.tgt is None
        assert inputs.src is not None and inputs.src.tolist() == [[4, 5, 6]]
        assert inputs.targets.tolist() == [[6, 5, 4]]
        assert inputs.offset == 0

    def test_decoder_only_reads_source_then_shifted_target(self) -> None:
        inputs = model_inputs("decoder_only", self.batch)

        assert inputs.src is None
        assert inputs.tgt is not None and inputs.tgt.tolist() == [[4, 5, 6, 6, 5]]
        assert inputs.offset == 2

    def test_encoder_decoder_uses_teacher_forcing(self) -> None:
        inputs = model_inputs("encoder_decoder", self.batch)

        assert inputs.tgt is not None and inputs.tgt.tolist() == [[BOS_TOKEN, 6, 5]]
        assert inputs.targets.tolist() == [[6, 5, 4]]
