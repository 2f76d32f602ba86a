"""Tests for logarithmic depth-scaling fits."""

from __future__ import annotations

import math

import pytest

from deepnorm_lab.experiments.scaling import fit_log_scaling, normal_equations_fit
from deepnorm_lab.runtime.errors import FitError


def test_two_points_fit_exactly() -> None:
    fit = fit_log_scaling([(math.e, 1.0), (math.e**2, 2.0)])

    assert fit.a == pytest.approx(1.0)
    assert fit.b == pytest.approx(0.0, abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.points == 2


def test_noisy_points_have_a_residual() -> None:
    points = [(10.0, 1.0), (100.0, 3.0), (1000.0, 4.0)]

    fit = fit_log_scaling(points)

    assert fit.residual > 0.0
    assert (fit.a, fit.b) == pytest.approx(normal_equations_fit(points), rel=1e-9)


def test_point_order_does_not_matter() -> None:
    points = [(3.0, 0.2), (30.0, 1.1), (300.0, 1.7), (3000.0, 3.0)]

    assert fit_log_scaling(points) == fit_log_scaling(list(reversed(points)))


def test_prediction_and_payload() -> None:
    fit = fit_log_scaling([(1.0, 5.0), (math.e, 7.0)])

    assert fit.predict(math.e**3) == pytest.approx(11.0)
    assert fit.to_dict()["schema_version"] == 1


@pytest.mark.parametrize(
    "points",
    [
        [(4.0, 1.0)],
        [(4.0, 1.0), (4.0, 2.0)],
        [(0.0, 1.0), (2.0, 1.0)],
        [(2.0, math.nan), (4.0, 1.0)],
    ],
)
def test_degenerate_inputs_raise(points: list[tuple[float, float]]) -> None:
    with pytest.raises(FitError):
        fit_log_scaling(points)
