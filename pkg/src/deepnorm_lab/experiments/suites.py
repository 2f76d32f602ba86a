"""Verification suites behind ``deepnorm-lab verify``."""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from time import perf_counter
from typing import Any, Literal

from deepnorm_lab.config.models import ArchShape, VerifyConfig
from deepnorm_lab.norm.gains import (
    compute_gains,
    decoder_term_coefficient,
    encoder_decoder_gains,
    encoder_term_coefficient,
    single_stack_coefficient,
    single_stack_gains,
)
from deepnorm_lab.observability.logging import get_event_logger
from deepnorm_lab.observability.metrics import MetricsRecorder, get_metrics_recorder
from deepnorm_lab.runtime.errors import AssumptionError
from deepnorm_lab.runtime.rng import generator_for
from deepnorm_lab.theory.bounds import (
    deepnorm_bound_per_delta,
    postln_bound_per_delta,
    theorem1_bound,
    theorem2_terms,
)
from deepnorm_lab.theory.lemma import lemma1_check, normalize_rows
from deepnorm_lab.theory.report import BoundReport, CheckResult, SuiteReport
from deepnorm_lab.theory.scalar import ScalarModel
from deepnorm_lab.theory.verify import theorem1_ratio_curve, verify_theorem1, verify_theorem2

SuiteName = Literal["lemma1", "thm1", "thm2", "identities"]
SUITES: tuple[SuiteName, ...] = ("lemma1", "thm1", "thm2", "identities")

IDENTITY_TOLERANCE = 1e-12
CLOSED_FORM_TOLERANCE = 1e-9
ROUNDED_TOLERANCE = 5e-3
# Allowed relative rise between adjacent curve ratios, per unit of the largest eta.
CURVE_SLACK_FACTOR = 10.0

Variant = Literal["vanilla", "deepnorm"]
VARIANTS: tuple[Variant, ...] = ("vanilla", "deepnorm")

_logger = get_event_logger(__name__)


@dataclass(slots=True)
class _SuiteRun:
    suite: str
    recorder: MetricsRecorder
    checks: list[CheckResult] = field(default_factory=list)

    def add(
        self,
        name: str,
        passed: bool,
        *,
        message: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        self.checks.append(CheckResult(name=name, passed=passed, message=message, details=details))
        self.recorder.observe_check(suite=self.suite, passed=passed)
        _logger.info("check_finished", suite=self.suite, check=name, passed=passed)

    def add_bound(self, name: str, report: BoundReport, tolerance: float) -> None:
        passed = report.passed(tolerance)
        message = None if passed else f"ratio {report.ratio:.6g} exceeds {tolerance:g}"
        self.add(name, passed, message=message, details=report.to_dict())


def _relative_error(value: float, expected: float) -> float:
    return abs(value - expected) / max(abs(expected), 1e-300)


def scalar_model(arch: ArchShape, variant: Variant, config: VerifyConfig) -> ScalarModel:
    if variant == "vanilla":
        return ScalarModel.vanilla(arch)
    return ScalarModel.from_gains(arch, config.gain_form)


def _model_or_skip(
    arch: ArchShape, variant: Variant, config: VerifyConfig, name: str, run: _SuiteRun
) -> ScalarModel | None:
    """Scalar model, or ``None`` after recording a skip when its gains break ``alpha >= 1``.

    Encoder-decoder DeepNorm gains give ``alpha_e < 1`` whenever ``N^4 M < 27``.
    """
    try:
        return scalar_model(arch, variant, config)
    except AssumptionError as exc:
        run.add(name, True, message=f"skipped: {exc}", details={"skipped": True})
        return None


def lemma1_suite(config: VerifyConfig, run: _SuiteRun) -> None:
    """Random normalized ``(X, q)`` per ``(n, d)``; every instance must satisfy the bound."""
    for n in config.lemma_ns:
        for d in config.lemma_ds:
            rng = generator_for(config.seed, f"lemma1/{n}/{d}")
            failures = 0
            worst_margin = -math.inf
            for _ in range(config.lemma_trials):
                x = normalize_rows(rng.standard_normal((n, d)))
                q = rng.normal(scale=3.0, size=n)
                check = lemma1_check(x, q)
                failures += int(not check.holds)
                worst_margin = max(worst_margin, check.lhs - check.rhs)
            run.add(
                f"lemma1_n{n}_d{d}",
                failures == 0,
                message=None if failures == 0 else f"{failures} instances violate the bound",
                details={
                    "trials": config.lemma_trials,
                    "failures": failures,
                    "worst_margin": worst_margin,
                },
            )


def _worst_rise(ratios: Sequence[float]) -> float:
    """Largest relative increase ``later / earlier - 1`` between adjacent ratios."""
    rises = [
        later / earlier - 1.0 if earlier > 0.0 else (math.inf if later > 0.0 else 0.0)
        for earlier, later in itertools.pairwise(ratios)
    ]
    return max(rises, default=0.0)


def thm1_suite(config: VerifyConfig, run: _SuiteRun) -> None:
    """Single-stack bound on every kind, depth, variant and direction, plus the growth law."""
    etas = sorted(config.eta_curve, reverse=True)
    relative_slack = CURVE_SLACK_FACTOR * (etas[0] if etas else 0.0)
    for kind in config.kinds:
        for depth in config.depths:
            arch = ArchShape.with_depth(kind, depth)
            for variant in VARIANTS:
                model = _model_or_skip(
                    arch, variant, config, f"thm1_{kind}_{variant}_L{depth}", run
                )
                if model is None:
                    continue
                for direction in config.directions:
                    name = f"thm1_{kind}_{variant}_L{depth}_{direction}"
                    report = verify_theorem1(
                        model,
                        generator_for(config.seed, name),
                        config.eta,
                        config.trials,
                        direction=direction,
                        alpha_scale=config.bound_alpha_scale,
                        label=name,
                    )
                    run.add_bound(name, report, config.ratio_tolerance)

        depth = max(config.depths)
        deepest = ArchShape.with_depth(kind, depth)
        for variant in VARIANTS:
            model = _model_or_skip(
                deepest, variant, config, f"thm1_curve_{kind}_{variant}_L{depth}", run
            )
            if model is None:
                continue
            for direction in config.directions:
                curve = theorem1_ratio_curve(
                    model,
                    etas,
                    seed=config.seed,
                    trials=config.trials,
                    direction=direction,
                    alpha_scale=config.bound_alpha_scale,
                )
                ratios = [report.ratio for report in curve]
                worst_rise = _worst_rise(ratios)
                run.add(
                    f"thm1_curve_{kind}_{variant}_L{depth}_{direction}",
                    worst_rise <= relative_slack,
                    details={
                        "etas": etas,
                        "ratios": ratios,
                        "relative_slack": relative_slack,
                        "worst_rise": worst_rise,
                    },
                )

    for depth in config.depths:
        _growth_checks(depth, run)


def _growth_checks(depth: int, run: _SuiteRun) -> None:
    """Post-LN bound doubles with depth; the DeepNorm bound grows by sqrt(2)."""
    postln = postln_bound_per_delta(2 * depth) / postln_bound_per_delta(depth)
    run.add(
        f"thm1_growth_post_ln_N{depth}",
        abs(postln - 2.0) <= IDENTITY_TOLERANCE,
        details={"ratio": postln, "expected": 2.0},
    )
    deepnorm = deepnorm_bound_per_delta(2 * depth) / deepnorm_bound_per_delta(depth)
    run.add(
        f"thm1_growth_deepnorm_N{depth}",
        abs(deepnorm - math.sqrt(2.0)) <= CLOSED_FORM_TOLERANCE,
        details={"ratio": deepnorm, "expected": math.sqrt(2.0)},
    )

    arch = ArchShape.with_depth("encoder_only", depth)
    unit = [1.0] * arch.encoder_sublayers
    vanilla = theorem1_bound(ScalarModel.vanilla(arch), unit)
    gained = theorem1_bound(ScalarModel.from_gains(arch), unit)
    run.add(
        f"thm1_closed_form_N{depth}",
        _relative_error(vanilla, postln_bound_per_delta(depth)) <= IDENTITY_TOLERANCE
        and _relative_error(gained, deepnorm_bound_per_delta(depth)) <= CLOSED_FORM_TOLERANCE,
        details={
            "post_ln": vanilla,
            "post_ln_expected": postln_bound_per_delta(depth),
            "deepnorm": gained,
            "deepnorm_expected": deepnorm_bound_per_delta(depth),
        },
    )


def thm2_suite(config: VerifyConfig, run: _SuiteRun) -> None:
    """Two-term encoder-decoder bound at N = M, plus its closed forms."""
    for depth in config.thm2_depths:
        arch = ArchShape.with_depth("encoder_decoder", depth)
        for variant in VARIANTS:
            model = _model_or_skip(arch, variant, config, f"thm2_{variant}_N{depth}_M{depth}", run)
            if model is None:
                continue
            for direction in config.directions:
                name = f"thm2_{variant}_N{depth}_M{depth}_{direction}"
                report = verify_theorem2(
                    model,
                    generator_for(config.seed, name),
                    config.eta,
                    config.trials,
                    direction=direction,
                    alpha_scale=config.bound_alpha_scale,
                    label=name,
                )
                run.add_bound(name, report, config.ratio_tolerance)

        unit_e = [1.0] * arch.encoder_sublayers
        unit_d = [1.0] * arch.decoder_sublayers
        first, second = theorem2_terms(ScalarModel.vanilla(arch), unit_e, unit_d)
        expected = (2 * depth * depth + 3 * depth) * math.sqrt(2.0)
        run.add(
            f"thm2_vanilla_closed_form_N{depth}",
            _relative_error(first + second, expected) <= IDENTITY_TOLERANCE,
            details={"bound": first + second, "expected": expected},
        )

        gained = _model_or_skip(arch, "deepnorm", config, f"thm2_decoder_term_M{depth}", run)
        if gained is None:
            continue
        _, decoder_term = theorem2_terms(gained, unit_e, unit_d)
        gains = encoder_decoder_gains(depth, depth, config.gain_form)
        simplified = math.sqrt(3.0 * depth * decoder_term_coefficient(gains, depth))
        run.add(
            f"thm2_decoder_term_M{depth}",
            abs(decoder_term - simplified) <= CLOSED_FORM_TOLERANCE,
            details={"decoder_term": decoder_term, "simplified": simplified},
        )


def identities_suite(config: VerifyConfig, run: _SuiteRun) -> None:
    """Gain identities at every configured depth and rounded-vs-exact agreement."""
    for depth in config.identity_depths:
        if "encoder_only" in config.kinds or "decoder_only" in config.kinds:
            alpha, beta = single_stack_gains(depth)
            coefficient = single_stack_coefficient(alpha, beta, depth)
            run.add(
                f"identity_single_stack_L{depth}",
                abs(coefficient - 1.0) <= IDENTITY_TOLERANCE,
                details={"coefficient": coefficient},
            )
        if "encoder_decoder" in config.kinds:
            _encoder_decoder_identities(depth, depth, run)

    if "encoder_decoder" in config.kinds:
        for n in config.rounded_depths:
            for m in config.rounded_depths:
                exact = encoder_decoder_gains(n, m, "exact")
                rounded = encoder_decoder_gains(n, m, "rounded")
                assert exact.alpha_enc is not None and exact.beta_enc is not None
                assert rounded.alpha_enc is not None and rounded.beta_enc is not None
                alpha_error = _relative_error(rounded.alpha_enc, exact.alpha_enc)
                beta_error = _relative_error(rounded.beta_enc, exact.beta_enc)
                run.add(
                    f"identity_rounded_N{n}_M{m}",
                    max(alpha_error, beta_error) <= ROUNDED_TOLERANCE,
                    details={"alpha_rel_error": alpha_error, "beta_rel_error": beta_error},
                )


def _encoder_decoder_identities(n: int, m: int, run: _SuiteRun) -> None:
    gains = compute_gains(ArchShape(kind="encoder_decoder", n=n, m=m), "exact")
    assert gains.alpha_enc is not None and gains.beta_enc is not None
    decoder = decoder_term_coefficient(gains, m)
    encoder = encoder_term_coefficient(gains, n, m)
    alpha_power = gains.alpha_enc**16
    target = float(n) ** 4 * m / 27.0
    product = gains.alpha_enc**2 * 2.0 * gains.beta_enc**2
    run.add(
        f"identity_encoder_decoder_N{n}_M{m}",
        abs(decoder - 1.0) <= IDENTITY_TOLERANCE
        and abs(encoder - 1.0) <= IDENTITY_TOLERANCE
        and _relative_error(alpha_power, target) <= IDENTITY_TOLERANCE
        and abs(product - 1.0) <= IDENTITY_TOLERANCE,
        details={
            "decoder_coefficient": decoder,
            "encoder_coefficient": encoder,
            "alpha_enc_pow16": alpha_power,
            "alpha_enc_pow16_expected": target,
            "alpha_beta_product": product,
        },
    )


_SUITE_BUILDERS: dict[str, Callable[[VerifyConfig, _SuiteRun], None]] = {
    "lemma1": lemma1_suite,
    "thm1": thm1_suite,
    "thm2": thm2_suite,
    "identities": identities_suite,
}


def run_suite(
    suite: SuiteName,
    config: VerifyConfig,
    *,
    recorder: MetricsRecorder | None = None,
) -> SuiteReport:
    """Run one suite; each check is logged and counted on the metrics recorder."""
    if suite not in _SUITE_BUILDERS:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    started = perf_counter()
    run = _SuiteRun(suite=suite, recorder=recorder or get_metrics_recorder())
    _SUITE_BUILDERS[suite](config, run)
    report = SuiteReport(
        suite=suite, checks=run.checks, elapsed_ms=(perf_counter() - started) * 1000
    )
    _logger.info(
        "suite_finished",
        suite=suite,
        passed=report.passed,
        failed=report.summary.failed,
        elapsed_ms=round(report.elapsed_ms, 3),
    )
    return report
