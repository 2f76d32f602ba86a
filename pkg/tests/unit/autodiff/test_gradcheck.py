"""Tests for the finite-difference oracle and gradient comparison."""

from __future__ import annotations

import math

import numpy as np
import pytest

from deepnorm_lab.autodiff import ops
from deepnorm_lab.autodiff.gradcheck import (
    compare_gradients,
    finite_diff_grad,
    jacobian,
    tape_grad,
)
from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.runtime.errors import InputError, OracleError


def test_sum_of_squares_matches_analytic_gradient() -> None:
    x = Tensor([1.0, 2.0])

    grad = finite_diff_grad(lambda t: ops.sum_all(ops.mul(t, t)), x, h=1e-5)

    np.testing.assert_allclose(grad.data, [2.0, 4.0], atol=1e-8)


def test_oracle_restores_the_input() -> None:
    x = Tensor([0.3, -0.7, 1.1])
    before = x.data.copy()

    finite_diff_grad(lambda t: ops.sum_all(ops.relu(t)), x)

    assert np.array_equal(x.data, before)


def test_layer_norm_sum_agrees_with_tape() -> None:
    rng = np.random.default_rng(11)
    x = Tensor(rng.standard_normal((1, 5)))
    weights = Tensor(rng.standard_normal((1, 5)))

    def f(t: Tensor) -> Tensor:
        return ops.sum_all(ops.mul(ops.layer_norm(t), weights))

    result = compare_gradients(tape_grad(f, x).data, finite_diff_grad(f, x).data)

    assert result.passed(1e-6)


def test_oracle_accepts_plain_float_functions() -> None:
    x = Tensor([0.5])

    grad = finite_diff_grad(lambda t: math.sin(float(t.data[0])), x)

    assert grad.data[0] == pytest.approx(math.cos(0.5), rel=1e-8)


def test_non_finite_evaluation_raises_oracle_error() -> None:
    x = Tensor([0.0])

    with pytest.raises(OracleError):
        finite_diff_grad(lambda t: float("inf") if t.data[0] > 0 else 0.0, x)


def test_step_must_be_positive() -> None:
    with pytest.raises(InputError):
        finite_diff_grad(lambda t: ops.sum_all(t), Tensor([1.0]), h=0.0)


def test_jacobian_of_linear_map_is_its_matrix() -> None:
    matrix = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    weights = Tensor(matrix.T)

    jac = jacobian(lambda t: ops.matmul(ops.reshape(t, (1, 2)), weights), Tensor([0.2, -0.4]))

    np.testing.assert_allclose(jac, matrix)


class TestCompareGradients:
    """Elementwise relative error with a magnitude floor."""

    def test_identical_gradients_pass(self) -> None:
        result = compare_gradients(np.array([1.0, -2.0]), np.array([1.0, -2.0]))

        assert result.max_rel_error == 0.0
        assert result.checked == 2

    def test_tiny_entries_are_skipped(self) -> None:
        result = compare_gradients(np.array([1e-12, 1.0]), np.array([-1e-12, 1.0]))

        assert result.skipped == 1
        assert result.passed(1e-6)

    def test_relative_error_uses_larger_magnitude(self) -> None:
        result = compare_gradients(np.array([1.0]), np.array([1.1]))

        assert result.max_rel_error == pytest.approx(0.1 / 1.1)
        assert not result.passed(1e-3)

    def test_all_skipped_reports_zero_error(self) -> None:
        result = compare_gradients(np.zeros(3), np.zeros(3))

        assert result.checked == 0
        assert result.skipped == 3
        assert result.passed(1e-12)
