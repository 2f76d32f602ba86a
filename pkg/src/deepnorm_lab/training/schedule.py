"""Learning-rate schedules."""

from __future__ import annotations

import math

from deepnorm_lab.config.models import ScheduleConfig
from deepnorm_lab.runtime.errors import InputError


def lr_at(schedule: ScheduleConfig, step: int, peak_lr: float) -> float:
    """Learning rate for 1-based ``step``.

    ``inverse_sqrt`` warms up linearly from ``warmup_init_lr`` to ``peak_lr``
    over ``warmup_steps`` updates, then decays as ``peak_lr * sqrt(warmup_steps / step)``.
    Without warmup steps it stays at ``peak_lr``.
    """
    if step < 1:
        raise InputError(f"schedule steps are 1-based, got {step}")
    if schedule.kind == "constant" or schedule.warmup_steps == 0:
        return peak_lr
    warmup = schedule.warmup_steps
    if step <= warmup:
        increment = (peak_lr - schedule.warmup_init_lr) / warmup
        return schedule.warmup_init_lr + step * increment
    return peak_lr * math.sqrt(warmup / step)
