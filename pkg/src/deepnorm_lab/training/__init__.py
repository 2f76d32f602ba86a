"""Optimizers, schedules, synthetic tasks and the instrumented training loop."""

from deepnorm_lab.training.diagnostics import (
    VanishingReport,
    detect_gradient_vanishing,
    ln_input_growth,
    top_layer_grad_norms,
)
from deepnorm_lab.training.loop import (
    evaluate_loss,
    model_update_norm,
    task_logits,
    train_model,
    train_run,
    train_step,
)
from deepnorm_lab.training.optim import (
    SGD,
    Adam,
    AdamState,
    adam_step,
    build_optimizer,
    clip_grad_norm,
    sgd_step,
)
from deepnorm_lab.training.schedule import lr_at
from deepnorm_lab.training.tasks import TaskBatch, make_batch, model_inputs, targets_for
from deepnorm_lab.training.trace import RunTrace, TraceRecord

__all__ = [
    "SGD",
    "Adam",
    "AdamState",
    "RunTrace",
    "TaskBatch",
    "TraceRecord",
    "VanishingReport",
    "adam_step",
    "build_optimizer",
    "clip_grad_norm",
    "detect_gradient_vanishing",
    "evaluate_loss",
    "ln_input_growth",
    "lr_at",
    "make_batch",
    "model_inputs",
    "model_update_norm",
    "sgd_step",
    "targets_for",
    "task_logits",
    "top_layer_grad_norms",
    "train_model",
    "train_run",
    "train_step",
]
