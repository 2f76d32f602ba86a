"""Sweeps, verification suites, scaling fits and the command line."""

from deepnorm_lab.experiments.scaling import ScalingFit, fit_log_scaling, normal_equations_fit
from deepnorm_lab.experiments.suites import SUITES, run_suite
from deepnorm_lab.experiments.sweep import (
    SweepRun,
    expand_sweep,
    execute_run,
    resolve_workers,
    run_sweep,
    summarize_sweep,
)

__all__ = [
    "SUITES",
    "ScalingFit",
    "SweepRun",
    "execute_run",
    "expand_sweep",
    "fit_log_scaling",
    "normal_equations_fit",
    "resolve_workers",
    "run_sweep",
    "run_suite",
    "summarize_sweep",
]
