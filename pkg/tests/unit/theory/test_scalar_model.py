"""Tests for the one-dimensional magnitude recursions."""

from __future__ import annotations

import math

import pytest

from deepnorm_lab.config.models import ArchShape
from deepnorm_lab.runtime.errors import AssumptionError, DimensionError, InputError
from deepnorm_lab.theory.scalar import (
    ScalarModel,
    cross_step,
    normalized_update,
    scalar_forward,
    step_gain,
)

ENCODER_2 = ArchShape(kind="encoder_only", n=2)


def test_step_gain_of_post_ln_block_is_sqrt_two() -> None:
    assert step_gain(1.0, 1.0, 1.0) == pytest.approx(math.sqrt(2.0))


def test_cross_step_mixes_decoder_and_encoder_states() -> None:
    assert cross_step(2.0, 0.5, 1.0, 3.0, 4.0) == pytest.approx((6.0 + 2.0) / math.sqrt(4.25))


class TestScalarForward:
    """Forward recursion through every sub-layer."""

    def test_uniform_encoder_matches_closed_form(self) -> None:
        model = ScalarModel.uniform(ENCODER_2, v=0.5, w=0.5, alpha_enc=1.5)

        expected = ((1.5 + 0.25) / math.sqrt(1.5**2 + 0.25**2)) ** 4
        assert scalar_forward(model, 1.0) == pytest.approx(expected, rel=1e-12)
        assert scalar_forward(model, 1.0) == pytest.approx(1.7538, abs=1e-3)

    @pytest.mark.parametrize("layers", [1, 3, 6])
    def test_post_ln_encoder_grows_as_two_to_the_n(self, layers: int) -> None:
        model = ScalarModel.vanilla(ArchShape(kind="encoder_only", n=layers))

        assert scalar_forward(model, 1.0) == pytest.approx(2.0**layers, rel=1e-12)

    def test_encoder_decoder_mixes_encoder_output_at_cross_attention(self) -> None:
        model = ScalarModel.vanilla(ArchShape(kind="encoder_decoder", n=1, m=1))

        assert scalar_forward(model, 1.0) == pytest.approx(2.0 + math.sqrt(2.0), rel=1e-12)

    def test_decoder_start_state_is_independent_of_encoder_input(self) -> None:
        model = ScalarModel.vanilla(ArchShape(kind="decoder_only", m=2))

        assert scalar_forward(model, 5.0, y=1.0) == pytest.approx(4.0, rel=1e-12)

    def test_non_finite_input_raises(self) -> None:
        with pytest.raises(InputError):
            scalar_forward(ScalarModel.vanilla(ENCODER_2), math.inf)


class TestScalarModelValidation:
    """Assumptions on list lengths, scalars and alpha."""

    def test_wrong_list_length(self) -> None:
        with pytest.raises(DimensionError):
            ScalarModel(arch=ENCODER_2, v_enc=(1.0,) * 3, w_enc=(1.0,) * 3)

    @pytest.mark.parametrize(("v", "w"), [(0.0, 0.5), (1.5, 0.5), (0.5, -0.1)])
    def test_scalars_outside_unit_interval(self, v: float, w: float) -> None:
        with pytest.raises(AssumptionError):
            ScalarModel.uniform(ENCODER_2, v=v, w=w)

    def test_alpha_below_one(self) -> None:
        with pytest.raises(AssumptionError):
            ScalarModel.uniform(ENCODER_2, v=0.5, w=0.5, alpha_enc=0.9)

    def test_shallow_encoder_decoder_gains_violate_alpha(self) -> None:
        with pytest.raises(AssumptionError):
            ScalarModel.from_gains(ArchShape(kind="encoder_decoder", n=1, m=1))

    def test_from_gains_uses_beta_for_both_scalars(self) -> None:
        model = ScalarModel.from_gains(ArchShape(kind="decoder_only", m=4))

        assert model.alpha_dec == pytest.approx(8.0**0.25)
        assert all(value == pytest.approx(32.0**-0.25) for value in model.v_dec + model.w_dec)
        assert len(model.v) == 8


def test_cross_attention_positions() -> None:
    model = ScalarModel.vanilla(ArchShape(kind="encoder_decoder", n=1, m=2))

    assert model.cross_indices() == [1, 4]
    assert model.decoder_kinds()[:3] == ["self_attention", "cross_attention", "ffn"]


class TestNormalizedUpdate:
    """Relative change of the normalized chain."""

    def test_identical_models_do_not_move(self) -> None:
        model = ScalarModel.from_gains(ArchShape(kind="encoder_decoder", n=4, m=4))

        assert normalized_update(model, model) == 0.0

    def test_encoder_chain_equals_forward_ratio(self) -> None:
        base = ScalarModel.uniform(ENCODER_2, v=0.5, w=0.5, alpha_enc=1.5)
        moved = base.with_scalars(v_enc=[0.6, 0.5, 0.4, 0.5])

        expected = abs(scalar_forward(moved, 1.0) / scalar_forward(base, 1.0) - 1.0)
        assert normalized_update(base, moved) == pytest.approx(expected, rel=1e-12)

    def test_architectures_must_match(self) -> None:
        first = ScalarModel.vanilla(ENCODER_2)
        second = ScalarModel.vanilla(ArchShape(kind="encoder_only", n=3))

        with pytest.raises(DimensionError):
            normalized_update(first, second)
