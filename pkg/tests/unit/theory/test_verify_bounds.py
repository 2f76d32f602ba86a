"""Tests for randomized bound verification and full-model update tracking."""

from __future__ import annotations

import math

import numpy as np
import pytest

from deepnorm_lab.config.models import ArchShape, TaskSpec
from deepnorm_lab.model.transformer import build_model
from deepnorm_lab.runtime.rng import generator_for
from deepnorm_lab.theory.scalar import ScalarModel, scalar_forward
from deepnorm_lab.theory.verify import (
    perturb_pair,
    single_stack_view,
    theorem1_ratio_curve,
    verify_full_model_update,
    verify_theorem1,
    verify_theorem2,
)
from deepnorm_lab.training.optim import SGD
from deepnorm_lab.training.tasks import make_batch


class TestPerturbPair:
    """Moves of exactly eta that stay inside (0, 1]."""

    @pytest.mark.parametrize("direction", ["sphere", "gradient"])
    def test_interior_point_moves_by_eta(self, direction: str) -> None:
        v, w, delta = perturb_pair(0.5, 0.3, 1e-3, generator_for(0, "pair"), direction)

        assert delta == 1e-3
        assert math.hypot(v - 0.5, w - 0.3) == pytest.approx(1e-3, rel=1e-9)

    def test_gradient_direction_flips_at_the_boundary(self) -> None:
        v, w, delta = perturb_pair(1.0, 1.0, 1e-2, generator_for(0, "pair"), "gradient")

        assert v < 1.0 and w < 1.0
        assert delta == 1e-2

    def test_corner_sphere_draws_stay_inside(self) -> None:
        rng = generator_for(1, "corner")
        for _ in range(50):
            v, w, _ = perturb_pair(1.0, 1.0, 1e-3, rng)

            assert 0.0 < v <= 1.0 and 0.0 < w <= 1.0

    def test_oversized_step_is_clipped(self) -> None:
        v, w, delta = perturb_pair(1.0, 1.0, 5.0, generator_for(0, "clip"))

        assert 0.0 < v <= 1.0 and 0.0 < w <= 1.0
        assert delta < 5.0
        assert delta == pytest.approx(math.hypot(v - 1.0, w - 1.0))

    def test_zero_eta_leaves_the_pair(self) -> None:
        assert perturb_pair(0.4, 0.6, 0.0, generator_for(0, "zero")) == (0.4, 0.6, 0.0)


class TestTheorem1:
    """Single-stack bound on scalar models."""

    @pytest.mark.parametrize("kind", ["encoder_only", "decoder_only"])
    @pytest.mark.parametrize("direction", ["sphere", "gradient"])
    def test_deepnorm_stays_within_bound(self, kind: str, direction: str) -> None:
        model = ScalarModel.from_gains(ArchShape.with_depth(kind, 64))

        report = verify_theorem1(model, generator_for(0, "thm1"), 1e-4, 50, direction=direction)

        assert report.passed(1.01)
        assert report.measured_update > 0.0
        assert len(report.per_term) == 128

    def test_post_ln_stays_within_bound(self) -> None:
        model = ScalarModel.vanilla(ArchShape(kind="encoder_only", n=16))

        report = verify_theorem1(model, generator_for(0, "thm1"), 1e-4, 50)

        assert report.passed(1.01)

    def test_doubled_alpha_breaks_the_bound(self) -> None:
        model = ScalarModel.from_gains(ArchShape(kind="encoder_only", n=64))

        report = verify_theorem1(
            model, generator_for(0, "control"), 1e-4, 20, direction="gradient", alpha_scale=2.0
        )

        assert not report.passed(1.01)

    def test_same_stream_reproduces_the_report(self) -> None:
        model = ScalarModel.from_gains(ArchShape(kind="encoder_only", n=4))

        first = verify_theorem1(model, generator_for(3, "repeat"), 1e-3, 25)
        second = verify_theorem1(model, generator_for(3, "repeat"), 1e-3, 25)

        assert first.to_dict() == second.to_dict()

    def test_zero_eta_reports_no_update(self) -> None:
        model = ScalarModel.vanilla(ArchShape(kind="encoder_only", n=2))

        report = verify_theorem1(model, generator_for(0, "zero"), 0.0, 10)

        assert report.measured_update == 0.0
        assert report.ratio == 0.0

    def test_ratio_curve_labels_each_eta(self) -> None:
        model = ScalarModel.from_gains(ArchShape(kind="encoder_only", n=16))

        curve = theorem1_ratio_curve(model, [1e-3, 1e-4, 1e-5], trials=30, direction="gradient")

        assert [report.label for report in curve] == ["eta=0.001", "eta=0.0001", "eta=1e-05"]
        assert all(report.passed(1.01) for report in curve)
        assert curve[2].ratio <= curve[0].ratio + 1e-2


def test_single_stack_view_keeps_the_encoder() -> None:
    model = ScalarModel.from_gains(ArchShape(kind="encoder_decoder", n=4, m=2))

    view = single_stack_view(model)

    assert view.arch == ArchShape(kind="encoder_only", n=4)
    assert view.v_enc == model.v_enc
    assert view.alpha_enc == model.alpha_enc


@pytest.mark.parametrize("variant", ["vanilla", "deepnorm"])
@pytest.mark.parametrize("direction", ["sphere", "gradient"])
def test_theorem2_holds_for_encoder_decoder(variant: str, direction: str) -> None:
    arch = ArchShape(kind="encoder_decoder", n=8, m=8)
    model = ScalarModel.vanilla(arch) if variant == "vanilla" else ScalarModel.from_gains(arch)

    report = verify_theorem2(model, generator_for(0, "thm2"), 1e-4, 30, direction=direction)

    assert report.passed(1.01)
    assert len(report.per_term) == 2


class TestFullModelUpdate:
    """Probe-logit drift of a real model under training."""

    def test_zero_learning_rate_never_moves(self, tiny_config) -> None:
        model = build_model(tiny_config("encoder_decoder", 1))
        batch = make_batch(TaskSpec(vocab_size=11, seq_len=4), np.random.default_rng(0), 2)

        series = verify_full_model_update(model, batch, SGD(), 3, lr=0.0)

        assert len(series) == 3
        assert list(series.values) == [0.0, 0.0, 0.0]
        assert not series.diverged

    def test_small_steps_move_the_logits(self, tiny_config) -> None:
        config = tiny_config("encoder_only", 2, norm="deepnorm", init="deepnorm_init")
        model = build_model(config)
        batch = make_batch(TaskSpec(vocab_size=11, seq_len=4), np.random.default_rng(1), 2)

        series = verify_full_model_update(
            model, batch, SGD(), 4, lr=1e-2, normalize_loss_grad=True
        )

        assert len(series) == 4
        assert all(math.isfinite(value) and value > 0.0 for value in series.values)
        assert series[0] > 0.0


def test_theorem1_measures_the_relative_output_change() -> None:
    arch = ArchShape(kind="encoder_only", n=2)
    base = ScalarModel.uniform(arch, v=0.5, w=0.4, alpha_enc=1.5)
    rng = generator_for(0, "thm1")
    pairs = zip(base.v_enc, base.w_enc, strict=True)
    moved = [perturb_pair(v, w, 1e-3, rng, "gradient") for v, w in pairs]
    perturbed = base.with_scalars(
        v_enc=[v for v, _, _ in moved], w_enc=[w for _, w, _ in moved]
    )

    report = verify_theorem1(base, generator_for(0, "thm1"), 1e-3, 1, direction="gradient")

    relative = abs(scalar_forward(perturbed, 1.0) / scalar_forward(base, 1.0) - 1.0)
    assert report.measured_update == pytest.approx(relative, rel=1e-12)
