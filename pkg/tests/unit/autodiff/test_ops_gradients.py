"""Tape gradients of every primitive against the finite-difference oracle."""

from __future__ import annotations

from collections.abc import Callable

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
from deepnorm_lab.runtime.errors import DimensionError, InputError
from deepnorm_lab.runtime.rng import generator_for

TOLERANCE = 1e-6


def _assert_gradients_match(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    *,
    tolerance: float = TOLERANCE,
) -> None:
    analytic = tape_grad(f, x).data
    numeric = finite_diff_grad(f, x, h=1e-5).data
    result = compare_gradients(analytic, numeric, floor=1e-6)
    assert result.checked > 0
    assert result.passed(tolerance), result


@pytest.fixture
def rng() -> np.random.Generator:
    return generator_for(0, "ops-gradcheck")


def _weights(rng: np.random.Generator, shape: tuple[int, ...]) -> Tensor:
    return Tensor(rng.standard_normal(shape))


class TestPrimitiveGradients:
    """Central differences at h=1e-5 on O(1) random inputs."""

    def test_matmul(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((3, 4)))
        b = _weights(rng, (4, 2))
        mix = _weights(rng, (3, 2))

        _assert_gradients_match(lambda t: ops.sum_all(ops.mul(ops.matmul(t, b), mix)), x)

    def test_matmul_right_operand(self, rng: np.random.Generator) -> None:
        a = _weights(rng, (3, 4))
        x = Tensor(rng.standard_normal((4, 2)))
        mix = _weights(rng, (3, 2))

        _assert_gradients_match(lambda t: ops.sum_all(ops.mul(ops.matmul(a, t), mix)), x)

    def test_broadcast_add_and_sub(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((4,)))
        base = _weights(rng, (3, 4))
        mix = _weights(rng, (3, 4))

        _assert_gradients_match(
            lambda t: ops.sum_all(ops.mul(ops.sub(ops.add(base, t), ops.scale(t, 0.5)), mix)), x
        )

    def test_relu(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.uniform(0.1, 1.0, size=(2, 5)) * rng.choice([-1.0, 1.0], size=(2, 5)))
        mix = _weights(rng, (2, 5))

        _assert_gradients_match(lambda t: ops.sum_all(ops.mul(ops.relu(t), mix)), x)

    def test_softmax_rows(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((3, 4)))
        mix = _weights(rng, (3, 4))

        _assert_gradients_match(lambda t: ops.sum_all(ops.mul(ops.softmax_rows(t), mix)), x)

    def test_masked_softmax_rows(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((4, 4)))
        mix = _weights(rng, (4, 4))
        mask = np.triu(np.ones((4, 4), dtype=bool), k=1)

        _assert_gradients_match(
            lambda t: ops.sum_all(ops.mul(ops.softmax_rows(t, mask), mix)), x
        )

    def test_layer_norm(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((2, 6)))
        mix = _weights(rng, (2, 6))

        _assert_gradients_match(lambda t: ops.sum_all(ops.mul(ops.layer_norm(t), mix)), x)

    def test_layer_norm_affine_parameters(self, rng: np.random.Generator) -> None:
        x = _weights(rng, (3, 5))
        bias = _weights(rng, (5,))
        gain = Tensor(rng.standard_normal((5,)))
        mix = _weights(rng, (3, 5))

        _assert_gradients_match(
            lambda g: ops.sum_all(ops.mul(ops.layer_norm(x, gain=g, bias=bias), mix)), gain
        )

    def test_embedding_with_repeated_ids(self, rng: np.random.Generator) -> None:
        table = Tensor(rng.standard_normal((5, 3)))
        ids = np.array([[0, 2, 2], [4, 0, 1]])
        mix = _weights(rng, (2, 3, 3))

        _assert_gradients_match(lambda t: ops.sum_all(ops.mul(ops.embedding(t, ids), mix)), table)

    def test_cross_entropy_with_label_smoothing(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((2, 3, 5)))
        targets = np.array([[0, 4, 2], [1, 1, 3]])

        _assert_gradients_match(
            lambda t: ops.cross_entropy(t, targets, label_smoothing=0.1), x
        )

    def test_reshape_transpose_and_slice(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((2, 3, 4)))
        mix = _weights(rng, (4, 1, 3))

        def f(t: Tensor) -> Tensor:
            moved = ops.transpose(ops.reshape(t, (2, 3, 4)), (2, 0, 1))
            return ops.sum_all(ops.mul(ops.slice_axis(moved, 1, 1, 2), mix))

        _assert_gradients_match(f, x)

    def test_mean_all(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((3, 3)))

        _assert_gradients_match(lambda t: ops.mean_all(ops.mul(t, t)), x)


class TestPrimitiveValues:
    """Forward values and input validation."""

    def test_softmax_row_sums_to_one(self) -> None:
        probs = ops.softmax_rows(Tensor([[1.0, 2.0, 3.0]]))

        assert abs(probs.data.sum() - 1.0) <= 1e-12

    def test_masked_entries_get_zero_probability(self) -> None:
        mask = np.array([[False, True, True], [False, False, True]])
        probs = ops.softmax_rows(Tensor(np.zeros((2, 3))), mask)

        np.testing.assert_allclose(probs.data, [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0]])

    def test_layer_norm_output_statistics(self) -> None:
        x = Tensor([[1.0, 2.0, 3.0, 4.0]])

        out = ops.layer_norm(x).data

        assert abs(out.mean()) <= 1e-12
        assert abs(out.var() - 1.0) <= 1e-5

    def test_layer_norm_rejects_width_one(self) -> None:
        with pytest.raises(DimensionError):
            ops.layer_norm(Tensor([[1.0]]))

    def test_layer_norm_rejects_non_positive_eps(self) -> None:
        with pytest.raises(InputError):
            ops.layer_norm(Tensor([[1.0, 2.0]]), eps=0.0)

    def test_matmul_rejects_mismatched_inner_dimensions(self) -> None:
        with pytest.raises(DimensionError):
            ops.matmul(Tensor(np.ones((3, 4))), Tensor(np.ones((3, 2))))

    def test_add_rejects_non_broadcastable_shapes(self) -> None:
        with pytest.raises(DimensionError):
            ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((4,))))

    def test_embedding_rejects_out_of_range_ids(self) -> None:
        with pytest.raises(InputError):
            ops.embedding(Tensor(np.ones((4, 2))), np.array([0, 4]))

    def test_cross_entropy_of_uniform_logits_is_log_vocab(self) -> None:
        loss = ops.cross_entropy(Tensor(np.zeros((2, 7))), np.array([0, 6]))

        assert loss.item() == pytest.approx(np.log(7.0), rel=1e-12)

    def test_slice_outside_axis_is_rejected(self) -> None:
        with pytest.raises(DimensionError):
            ops.slice_axis(Tensor(np.ones((2, 3))), 1, 2, 4)


@pytest.mark.parametrize("factor", [2.0, 10.0, 100.0])
def test_layer_norm_jacobian_scales_inversely_with_input(factor: float) -> None:
    rng = generator_for(0, "ln-jacobian")
    row = rng.standard_normal(64)
    row -= row.mean()

    def frobenius(scale: float) -> float:
        jac = jacobian(lambda t: ops.layer_norm(t, eps=1e-12), Tensor(row * scale))
        return float(np.linalg.norm(jac))

    base = frobenius(1.0)
    scaled = frobenius(factor)

    assert scaled == pytest.approx(base / factor, rel=1e-6)
