"""Tests for the verification suites."""

from __future__ import annotations

import pytest

from deepnorm_lab.config.models import VerifyConfig
from deepnorm_lab.experiments.suites import SUITES, _worst_rise, run_suite


class _CheckCounter:
    def __init__(self) -> None:
        self.outcomes: list[tuple[str, bool]] = []

    def observe_step(self, *, scheme: str, loss: float, duration_seconds: float) -> None:
        pass

    def observe_divergence(self, *, scheme: str) -> None:
        pass

    def observe_check(self, *, suite: str, passed: bool) -> None:
        self.outcomes.append((suite, passed))


def _small(**overrides: object) -> VerifyConfig:
    values: dict[str, object] = {
        "kinds": ["encoder_only"],
        "trials": 20,
        "depths": [2, 4],
        "thm2_depths": [2],
        "eta_curve": [1e-3, 1e-4],
        "lemma_trials": 50,
        "lemma_ns": [2, 8],
        "lemma_ds": [4],
    }
    values.update(overrides)
    return VerifyConfig.model_validate(values)


def _names(report) -> list[str]:
    return [check.name for check in report.checks]


def test_suite_names() -> None:
    assert SUITES == ("lemma1", "thm1", "thm2", "identities")


def test_unknown_suite_is_rejected() -> None:
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("thm3", VerifyConfig())  # type: ignore[arg-type]


def test_lemma1_suite_passes() -> None:
    report = run_suite("lemma1", _small())

    assert report.passed
    assert _names(report) == ["lemma1_n2_d4", "lemma1_n8_d4"]
    assert report.checks[0].details is not None
    assert report.checks[0].details["failures"] == 0


class TestTheorem1Suite:
    """Bound checks, ratio curves and the growth law."""

    def test_small_protocol_passes(self) -> None:
        report = run_suite("thm1", _small())

        assert report.passed
        names = _names(report)
        assert "thm1_encoder_only_deepnorm_L4_gradient" in names
        assert "thm1_curve_encoder_only_vanilla_L4_sphere" in names
        assert "thm1_growth_deepnorm_N2" in names
        assert "thm1_closed_form_N4" in names

    def test_curve_checks_report_a_ratio_relative_slack(self) -> None:
        report = run_suite("thm1", _small(directions=["gradient"]))

        curves = [check for check in report.checks if check.name.startswith("thm1_curve_")]
        assert len(curves) == 2
        for check in curves:
            assert check.details is not None
            assert check.details["relative_slack"] == pytest.approx(10.0 * 1e-3)
            assert check.details["worst_rise"] <= check.details["relative_slack"]
            earlier, later = check.details["ratios"]
            assert later / earlier - 1.0 == pytest.approx(check.details["worst_rise"])

    def test_doubled_alpha_fails_on_deepnorm(self) -> None:
        config = _small(depths=[64], directions=["gradient"], bound_alpha_scale=2.0)

        report = run_suite("thm1", config)

        failed = [check.name for check in report.checks if not check.passed]
        assert not report.passed
        assert "thm1_encoder_only_deepnorm_L64_gradient" in failed
        assert not any("vanilla" in name for name in failed)

    def test_encoder_decoder_gains_below_one_are_skipped(self) -> None:
        report = run_suite("thm1", _small(kinds=["encoder_decoder"], depths=[1]))

        skipped = [
            check for check in report.checks if check.details and check.details.get("skipped")
        ]
        assert report.passed
        assert [check.name for check in skipped] == [
            "thm1_encoder_decoder_deepnorm_L1",
            "thm1_curve_encoder_decoder_deepnorm_L1",
        ]


def test_theorem2_suite_records_closed_forms_and_skips() -> None:
    report = run_suite("thm2", _small(thm2_depths=[1, 2]))

    names = _names(report)
    assert report.passed
    assert "thm2_deepnorm_N1_M1" in names
    assert "thm2_deepnorm_N2_M2_sphere" in names
    assert "thm2_vanilla_closed_form_N1" in names
    assert "thm2_decoder_term_M2" in names
    skip = report.checks[names.index("thm2_deepnorm_N1_M1")]
    assert skip.details == {"skipped": True}


def test_identities_suite_with_defaults() -> None:
    report = run_suite("identities", VerifyConfig())

    names = _names(report)
    assert report.passed
    assert "identity_single_stack_L1000" in names
    assert "identity_encoder_decoder_N18_M18" in names
    assert "identity_rounded_N1_M1000" in names
    assert len(names) == 2 * 13 + 16


def test_every_check_reaches_the_recorder() -> None:
    counter = _CheckCounter()

    report = run_suite("identities", _small(identity_depths=[1, 2]), recorder=counter)

    assert len(counter.outcomes) == len(report.checks)
    assert all(suite == "identities" for suite, _ in counter.outcomes)


def test_payload_is_reproducible_without_timing() -> None:
    first = run_suite("thm2", _small()).to_dict(include_timing=False)
    second = run_suite("thm2", _small()).to_dict(include_timing=False)

    assert first == second


@pytest.mark.parametrize(
    ("ratios", "expected"),
    [([0.8, 0.79, 0.7], -0.0125), ([0.5, 0.51], 0.02), ([1e-4, 1.5e-4], 0.5), ([0.9], 0.0)],
)
def test_worst_rise_is_relative_to_the_earlier_ratio(ratios: list[float], expected: float) -> None:
    assert _worst_rise(ratios) == pytest.approx(expected)
