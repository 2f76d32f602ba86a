"""Scalar reductions, closed-form bounds and their randomized verification."""

from deepnorm_lab.theory.bounds import (
    deepnorm_bound_per_delta,
    postln_bound_per_delta,
    theorem1_bound,
    theorem1_terms,
    theorem2_bound,
    theorem2_terms,
)
from deepnorm_lab.theory.lemma import LemmaCheck, lemma1_check, normalize_rows, softmax
from deepnorm_lab.theory.report import BoundReport, CheckResult, CheckSummary, SuiteReport
from deepnorm_lab.theory.scalar import (
    ScalarModel,
    cross_step,
    encoder_output,
    normalized_update,
    scalar_forward,
    step_gain,
)
from deepnorm_lab.theory.verify import (
    UpdateSeries,
    perturb_pair,
    single_stack_view,
    theorem1_ratio_curve,
    verify_full_model_update,
    verify_theorem1,
    verify_theorem2,
)

__all__ = [
    "BoundReport",
    "CheckResult",
    "CheckSummary",
    "LemmaCheck",
    "ScalarModel",
    "SuiteReport",
    "UpdateSeries",
    "cross_step",
    "deepnorm_bound_per_delta",
    "encoder_output",
    "lemma1_check",
    "normalize_rows",
    "normalized_update",
    "perturb_pair",
    "postln_bound_per_delta",
    "scalar_forward",
    "single_stack_view",
    "softmax",
    "step_gain",
    "theorem1_bound",
    "theorem1_ratio_curve",
    "theorem1_terms",
    "theorem2_bound",
    "theorem2_terms",
    "verify_full_model_update",
    "verify_theorem1",
    "verify_theorem2",
]
