"""Tests for weight initializers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from deepnorm_lab.autodiff.init import ones, xavier_normal, xavier_std, zeros
from deepnorm_lab.runtime.errors import InputError
from deepnorm_lab.runtime.rng import generator_for


def test_xavier_std_formula() -> None:
    assert xavier_std(64, 64) == pytest.approx(math.sqrt(2.0 / 128.0))
    assert xavier_std(64, 128, gain=0.5) == pytest.approx(0.5 * math.sqrt(2.0 / 192.0))


def test_empirical_std_tracks_gain() -> None:
    tensor = xavier_normal(256, 256, 0.25, generator_for(0, "xavier"))

    expected = xavier_std(256, 256, 0.25)
    assert tensor.data.std() == pytest.approx(expected, rel=0.02)
    assert abs(tensor.data.mean()) < 0.1 * expected


def test_same_stream_gives_identical_weights() -> None:
    first = xavier_normal(4, 3, 1.0, generator_for(7, "encoder_1_ffn.W_1"), name="w")
    second = xavier_normal(4, 3, 1.0, generator_for(7, "encoder_1_ffn.W_1"), name="w")

    assert np.array_equal(first.data, second.data)
    assert first.requires_grad
    assert first.shape == (4, 3)


def test_zero_gain_gives_zero_matrix() -> None:
    tensor = xavier_normal(3, 3, 0.0, generator_for(0, "zero"))

    assert not np.any(tensor.data)


@pytest.mark.parametrize(("fan_in", "fan_out", "gain"), [(0, 3, 1.0), (3, 0, 1.0), (3, 3, -1.0)])
def test_invalid_arguments_raise(fan_in: int, fan_out: int, gain: float) -> None:
    with pytest.raises(InputError):
        xavier_normal(fan_in, fan_out, gain, generator_for(0, "bad"))


def test_constant_initializers_are_trainable() -> None:
    assert np.array_equal(ones((3,)).data, np.ones(3))
    assert np.array_equal(zeros((2,)).data, np.zeros(2))
    assert ones((3,), name="ln_gain").requires_grad
