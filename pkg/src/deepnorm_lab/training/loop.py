"""Training loop with divergence detection and per-sub-layer instrumentation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from deepnorm_lab.autodiff import ops
from deepnorm_lab.autodiff.tensor import Tape, Tensor, no_grad
from deepnorm_lab.config.models import ModelConfig, TrainConfig
from deepnorm_lab.model.transformer import (
    ForwardProbe,
    TransformerModel,
    build_model,
    model_forward,
)
from deepnorm_lab.observability.logging import get_event_logger
from deepnorm_lab.observability.metrics import MetricsRecorder, get_metrics_recorder
from deepnorm_lab.runtime.rng import generator_for
from deepnorm_lab.training.optim import Optimizer, build_optimizer, clip_grad_norm
from deepnorm_lab.training.schedule import lr_at
from deepnorm_lab.training.tasks import ModelInputs, make_batch, model_inputs
from deepnorm_lab.training.trace import RunTrace, TraceRecord

_logger = get_event_logger(__name__)


@dataclass(frozen=True, slots=True)
class StepOutcome:
    """Loss of the trained batch and whether the parameters were updated."""

    loss: float
    updated: bool


def task_logits(
    model: TransformerModel,
    inputs: ModelInputs,
    *,
    probe: ForwardProbe | None = None,
    dropout_rng: np.random.Generator | None = None,
) -> Tensor:
    """Logits aligned with ``inputs.targets``."""
    logits = model_forward(model, inputs.src, inputs.tgt, probe=probe, dropout_rng=dropout_rng)
    length = inputs.targets.shape[1]
    if inputs.offset == 0 and logits.shape[1] == length:
        return logits
    return ops.slice_axis(logits, 1, inputs.offset, inputs.offset + length)


def loss_and_grad(
    logits: np.ndarray,
    targets: np.ndarray,
    *,
    label_smoothing: float = 0.0,
    normalize: bool = False,
) -> tuple[float, np.ndarray]:
    """Cross-entropy value and ``dL/dlogits``, optionally rescaled to unit norm."""
    leaf = Tensor(logits, requires_grad=True)
    with Tape() as tape:
        loss = ops.cross_entropy(leaf, targets, label_smoothing=label_smoothing)
    tape.backward(loss)
    grad = leaf.grad if leaf.grad is not None else np.zeros_like(logits)
    if normalize:
        norm = float(np.linalg.norm(grad))
        if norm > 0.0 and math.isfinite(norm):
            grad = grad / norm
    return loss.item(), grad


def evaluate_loss(
    model: TransformerModel,
    inputs: ModelInputs,
    label_smoothing: float = 0.0,
) -> tuple[np.ndarray, float]:
    """Probe logits and loss without recording a tape."""
    with no_grad():
        logits = task_logits(model, inputs).data
    loss, _ = loss_and_grad(logits, inputs.targets, label_smoothing=label_smoothing)
    return logits, loss


def model_update_norm(logits: np.ndarray, reference: np.ndarray) -> float:
    """Euclidean norm of the logit change over the whole probe batch."""
    return float(np.linalg.norm((logits - reference).reshape(-1)))


def sublayer_grad_norms(model: TransformerModel) -> dict[str, float]:
    norms: dict[str, float] = {}
    for block in model.sublayers():
        total = 0.0
        for _, tensor in block.parameters():
            if tensor.grad is not None:
                total += float(np.sum(tensor.grad * tensor.grad))
        norms[block.name] = math.sqrt(total)
    return norms


def backward_on(
    model: TransformerModel,
    inputs: ModelInputs,
    *,
    label_smoothing: float = 0.0,
    normalize: bool = False,
    probe: ForwardProbe | None = None,
    dropout_rng: np.random.Generator | None = None,
) -> float:
    """Fresh gradients of the task loss on ``inputs``; returns the loss."""
    model.zero_grad()
    with Tape() as tape:
        logits = task_logits(model, inputs, probe=probe, dropout_rng=dropout_rng)
    loss, grad = loss_and_grad(
        logits.data, inputs.targets, label_smoothing=label_smoothing, normalize=normalize
    )
    if math.isfinite(loss):
        tape.backward(logits, grad)
    return loss


def train_step(
    model: TransformerModel,
    inputs: ModelInputs,
    optimizer: Optimizer,
    lr: float,
    *,
    label_smoothing: float = 0.0,
    normalize: bool = False,
    grad_clip: float | None = None,
) -> StepOutcome:
    loss = backward_on(model, inputs, label_smoothing=label_smoothing, normalize=normalize)
    if not math.isfinite(loss):
        return StepOutcome(loss=loss, updated=False)
    params = list(model.iter_tensors())
    if grad_clip is not None:
        clip_grad_norm(params, grad_clip)
    return StepOutcome(loss=loss, updated=optimizer.step(params, lr))


def train_run(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    *,
    label: str = "",
    recorder: MetricsRecorder | None = None,
) -> RunTrace:
    """Build a model from ``model_cfg`` and train it; see :func:`train_model`."""
    return train_model(build_model(model_cfg), train_cfg, label=label, recorder=recorder)


def train_model(
    model: TransformerModel,
    train_cfg: TrainConfig,
    *,
    label: str = "",
    recorder: MetricsRecorder | None = None,
) -> RunTrace:
    """Train ``model`` in place and record its trace.

    Step 0 is recorded on the held-out probe batch before any update. Every
    ``record_interval`` steps (and at the last step) the record holds the probe
    loss, the logit change against step 0, per-sub-layer gradient norms and LN
    input norms of the batch just trained on. The run stops at the first
    non-finite loss or gradient, or at a loss above ``divergence_factor`` times
    the step-0 loss.
    """
    metrics = recorder or get_metrics_recorder()
    config = model.config
    task = train_cfg.task
    kind = config.arch.kind
    scheme = label or f"{config.norm}/{config.init}"
    log = _logger.bind(label=scheme)

    data_rng = generator_for(train_cfg.seed, "data")
    dropout_rng = generator_for(train_cfg.seed, "dropout") if config.dropout > 0.0 else None
    probe_inputs = model_inputs(
        kind, make_batch(task, generator_for(train_cfg.seed, "probe"), train_cfg.probe_batch_size)
    )
    optimizer = build_optimizer(train_cfg.optimizer)
    params = list(model.iter_tensors())
    trace = RunTrace(
        sublayers=[block.name for block in model.sublayers()],
        d_model=config.d_model,
        label=scheme,
    )

    log.info("run_started", steps=train_cfg.steps, lr=train_cfg.lr, kind=kind)
    probe = ForwardProbe()
    initial_loss = backward_on(
        model,
        probe_inputs,
        label_smoothing=train_cfg.label_smoothing,
        normalize=train_cfg.normalize_loss_grad,
        probe=probe,
    )
    reference, _ = evaluate_loss(model, probe_inputs, train_cfg.label_smoothing)
    trace.append(
        TraceRecord(
            step=0,
            loss=initial_loss,
            train_loss=initial_loss,
            lr=lr_at(train_cfg.schedule, 1, train_cfg.lr),
            model_update=0.0,
            grad_norms=sublayer_grad_norms(model),
            ln_inputs=dict(probe.ln_inputs),
        )
    )
    if not math.isfinite(initial_loss):
        trace.mark_diverged(0)
        metrics.observe_divergence(scheme=scheme)
        log.warning("run_diverged", step=0, loss=initial_loss)
        return trace

    threshold = train_cfg.divergence_factor * initial_loss
    for step in range(1, train_cfg.steps + 1):
        started = time.perf_counter()
        record_now = step % train_cfg.record_interval == 0 or step == train_cfg.steps
        inputs = model_inputs(kind, make_batch(task, data_rng, train_cfg.batch_size))
        probe = ForwardProbe()
        lr = lr_at(train_cfg.schedule, step, train_cfg.lr)

        train_loss = backward_on(
            model,
            inputs,
            label_smoothing=train_cfg.label_smoothing,
            normalize=train_cfg.normalize_loss_grad,
            probe=probe,
            dropout_rng=dropout_rng,
        )
        grad_norms = sublayer_grad_norms(model) if record_now else {}
        updated = False
        if math.isfinite(train_loss) and train_loss <= threshold:
            if train_cfg.grad_clip is not None:
                clip_grad_norm(params, train_cfg.grad_clip)
            updated = optimizer.step(params, lr)

        if not updated:
            trace.append(
                TraceRecord(
                    step=step,
                    loss=train_loss,
                    train_loss=train_loss,
                    lr=lr,
                    model_update=math.nan,
                    grad_norms=grad_norms or sublayer_grad_norms(model),
                    ln_inputs=dict(probe.ln_inputs),
                )
            )
            trace.mark_diverged(step)
            metrics.observe_divergence(scheme=scheme)
            log.warning("run_diverged", step=step, loss=train_loss)
            return trace

        trace.steps_completed = step
        metrics.observe_step(
            scheme=scheme, loss=train_loss, duration_seconds=time.perf_counter() - started
        )
        if not record_now:
            continue

        logits, probe_loss = evaluate_loss(model, probe_inputs, train_cfg.label_smoothing)
        update = model_update_norm(logits, reference)
        trace.append(
            TraceRecord(
                step=step,
                loss=probe_loss,
                train_loss=train_loss,
                lr=lr,
                model_update=update,
                grad_norms=grad_norms,
                ln_inputs=dict(probe.ln_inputs),
            )
        )
        log.debug("train_record", step=step, loss=probe_loss, model_update=update)
        if not (math.isfinite(probe_loss) and math.isfinite(update)) or probe_loss > threshold:
            trace.mark_diverged(step)
            metrics.observe_divergence(scheme=scheme)
            log.warning("run_diverged", step=step, loss=probe_loss)
            return trace

    log.info(
        "run_finished",
        steps=trace.steps_completed,
        initial_loss=trace.initial_loss,
        final_loss=trace.final_loss,
        converged=trace.converged(),
    )
    return trace
