"""Deterministic reverse-mode automatic differentiation over f64 tensors."""

from deepnorm_lab.autodiff.gradcheck import (
    GradCheckResult,
    compare_gradients,
    finite_diff_grad,
    jacobian,
    tape_grad,
)
from deepnorm_lab.autodiff.init import xavier_normal, xavier_std
from deepnorm_lab.autodiff.ops import (
    DEFAULT_LN_EPS,
    add,
    cross_entropy,
    embedding,
    layer_norm,
    matmul,
    mean_all,
    relu,
    reshape,
    scale,
    slice_axis,
    softmax_rows,
    sum_all,
    transpose,
)
from deepnorm_lab.autodiff.tensor import Node, Tape, Tensor, no_grad

__all__ = [
    "DEFAULT_LN_EPS",
    "GradCheckResult",
    "Node",
    "Tape",
    "Tensor",
    "add",
    "compare_gradients",
    "cross_entropy",
    "embedding",
    "finite_diff_grad",
    "jacobian",
    "layer_norm",
    "matmul",
    "mean_all",
    "no_grad",
    "relu",
    "reshape",
    "scale",
    "slice_axis",
    "softmax_rows",
    "sum_all",
    "tape_grad",
    "transpose",
    "xavier_normal",
    "xavier_std",
]
