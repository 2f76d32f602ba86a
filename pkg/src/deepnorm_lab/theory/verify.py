"""Randomized checks of the model-update bounds.

Every ``(v_i, w_i)`` pair is moved by exactly ``eta`` (unless that would leave
``(0, 1]``), the relative output change of the normalized scalar chain is
measured, and the worst measured/bound ratio over all trials is reported.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from deepnorm_lab.config.models import ArchShape
from deepnorm_lab.model.transformer import TransformerModel
from deepnorm_lab.runtime.rng import generator_for
from deepnorm_lab.theory.bounds import theorem1_terms, theorem2_terms
from deepnorm_lab.theory.report import BoundReport
from deepnorm_lab.theory.scalar import ScalarModel, normalized_update
from deepnorm_lab.training.loop import evaluate_loss, model_update_norm, train_step
from deepnorm_lab.training.optim import Optimizer
from deepnorm_lab.training.tasks import TaskBatch, model_inputs

Direction = Literal["sphere", "gradient"]

MAX_RESAMPLES = 64
_FLOOR = 1e-12


def _inside(v: float, w: float) -> bool:
    return 0.0 < v <= 1.0 and 0.0 < w <= 1.0


def perturb_pair(
    v: float,
    w: float,
    eta: float,
    rng: np.random.Generator,
    direction: Direction = "sphere",
) -> tuple[float, float, float]:
    """Move ``(v, w)`` by ``eta``; returns ``(v*, w*, ||(v*, w*) - (v, w)||)``.

    ``sphere`` draws a uniform direction and redraws while the move leaves
    ``(0, 1]``; ``gradient`` moves along ``(w, v)``, the direction that changes
    ``v w`` fastest, flipping sign when needed. Either falls back to the inward
    gradient direction and finally to clipping.
    """
    if eta == 0.0:
        return v, w, 0.0
    norm = math.hypot(v, w)
    unit = (w / norm, v / norm)
    if direction == "sphere":
        for _ in range(MAX_RESAMPLES):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            candidate = (v + eta * math.cos(angle), w + eta * math.sin(angle))
            if _inside(*candidate):
                return candidate[0], candidate[1], eta
    signs = (1.0, -1.0) if direction == "gradient" else (-1.0, 1.0)
    for sign in signs:
        candidate = (v + sign * eta * unit[0], w + sign * eta * unit[1])
        if _inside(*candidate):
            return candidate[0], candidate[1], eta
    clipped = (
        min(1.0, max(_FLOOR, v - eta * unit[0])),
        min(1.0, max(_FLOOR, w - eta * unit[1])),
    )
    return clipped[0], clipped[1], math.hypot(clipped[0] - v, clipped[1] - w)


def _perturb_all(
    v: Sequence[float],
    w: Sequence[float],
    eta: float,
    rng: np.random.Generator,
    direction: Direction,
) -> tuple[list[float], list[float], list[float]]:
    new_v, new_w, deltas = [], [], []
    for v_i, w_i in zip(v, w, strict=True):
        v_star, w_star, delta = perturb_pair(v_i, w_i, eta, rng, direction)
        new_v.append(v_star)
        new_w.append(w_star)
        deltas.append(delta)
    return new_v, new_w, deltas


def single_stack_view(model: ScalarModel) -> ScalarModel:
    """The stack a single-stack bound talks about: the encoder when present, else the decoder."""
    if model.arch.kind == "encoder_decoder":
        return ScalarModel(
            arch=ArchShape(kind="encoder_only", n=model.arch.n),
            v_enc=model.v_enc,
            w_enc=model.w_enc,
            alpha_enc=model.alpha_enc,
        )
    return model


def _worst(
    trials: int,
    eta: float,
    label: str,
    trial: Callable[[], tuple[float, float, list[float]]],
) -> BoundReport:
    worst: BoundReport | None = None
    for _ in range(trials):
        measured, bound, terms = trial()
        report = BoundReport.from_measurement(
            measured, bound, eta=eta, per_term=terms, trials=trials, label=label
        )
        if worst is None or report.ratio > worst.ratio:
            worst = report
    assert worst is not None
    return worst


def verify_theorem1(
    model: ScalarModel,
    rng: np.random.Generator,
    eta: float,
    trials: int,
    *,
    direction: Direction = "sphere",
    alpha_scale: float = 1.0,
    label: str = "",
) -> BoundReport:
    """Worst ratio of measured single-stack update to the per-sub-layer sum bound.

    The measured quantity is the relative update ``normalized_update``, i.e.
    ``|F(x, theta*) / F(x, theta) - 1|`` at unit input, not the absolute output change.
    """
    stack = single_stack_view(model)
    if eta == 0.0:
        return BoundReport.from_measurement(
            0.0, 0.0, eta=0.0, per_term=[], trials=trials, label=label
        )

    def trial() -> tuple[float, float, list[float]]:
        if stack.arch.has_encoder:
            v, w, deltas = _perturb_all(stack.v_enc, stack.w_enc, eta, rng, direction)
            perturbed = stack.with_scalars(v_enc=v, w_enc=w)
        else:
            v, w, deltas = _perturb_all(stack.v_dec, stack.w_dec, eta, rng, direction)
            perturbed = stack.with_scalars(v_dec=v, w_dec=w)
        terms = theorem1_terms(stack, deltas, alpha_scale=alpha_scale)
        return normalized_update(stack, perturbed), math.fsum(terms), terms

    return _worst(trials, eta, label, trial)


def verify_theorem2(
    model: ScalarModel,
    rng: np.random.Generator,
    eta: float,
    trials: int,
    *,
    direction: Direction = "sphere",
    alpha_scale: float = 1.0,
    label: str = "",
) -> BoundReport:
    """Worst ratio for encoder-decoder models; ``per_term`` is ``[encoder term, decoder term]``.

    As in ``verify_theorem1`` the bounded quantity is the relative ``normalized_update``.
    """
    if eta == 0.0:
        return BoundReport.from_measurement(
            0.0, 0.0, eta=0.0, per_term=[], trials=trials, label=label
        )

    def trial() -> tuple[float, float, list[float]]:
        v_e, w_e, delta_e = _perturb_all(model.v_enc, model.w_enc, eta, rng, direction)
        v_d, w_d, delta_d = _perturb_all(model.v_dec, model.w_dec, eta, rng, direction)
        perturbed = model.with_scalars(v_enc=v_e, w_enc=w_e, v_dec=v_d, w_dec=w_d)
        first, second = theorem2_terms(model, delta_e, delta_d, alpha_scale=alpha_scale)
        return normalized_update(model, perturbed), first + second, [first, second]

    return _worst(trials, eta, label, trial)


def theorem1_ratio_curve(
    model: ScalarModel,
    etas: Sequence[float],
    *,
    seed: int = 0,
    trials: int = 100,
    direction: Direction = "sphere",
    alpha_scale: float = 1.0,
) -> list[BoundReport]:
    """One report per ``eta``, each drawn from the same seeded stream."""
    return [
        verify_theorem1(
            model,
            generator_for(seed, "ratio_curve"),
            eta,
            trials,
            direction=direction,
            alpha_scale=alpha_scale,
            label=f"eta={eta:g}",
        )
        for eta in etas
    ]


@dataclass(slots=True)
class UpdateSeries:
    """``||F(x, theta_i) - F(x, theta_0)||`` after each step; truncated on divergence."""

    values: list[float] = field(default_factory=list)
    diverged: bool = False

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> float:
        return self.values[index]


def verify_full_model_update(
    model: TransformerModel,
    probe_batch: TaskBatch,
    optimizer: Optimizer,
    steps: int,
    *,
    lr: float,
    batches: Callable[[int], TaskBatch] | None = None,
    normalize_loss_grad: bool = False,
) -> UpdateSeries:
    """Train ``model`` in place for ``steps`` and measure the probe-logit drift after each.

    ``batches(step)`` supplies the training batch for 1-based ``step``; by
    default the model trains on the probe batch itself.
    """
    kind = model.config.arch.kind
    probe_inputs = model_inputs(kind, probe_batch)
    reference, _ = evaluate_loss(model, probe_inputs)
    series = UpdateSeries()
    for step in range(1, steps + 1):
        batch = batches(step) if batches is not None else probe_batch
        outcome = train_step(
            model, model_inputs(kind, batch), optimizer, lr, normalize=normalize_loss_grad
        )
        if not outcome.updated:
            series.diverged = True
            break
        logits, _ = evaluate_loss(model, probe_inputs)
        update = model_update_norm(logits, reference)
        if not math.isfinite(update):
            series.diverged = True
            break
        series.values.append(update)
    return series
