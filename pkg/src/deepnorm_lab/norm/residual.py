"""Residual composition rules for each normalization scheme."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from deepnorm_lab.autodiff import ops
from deepnorm_lab.autodiff.tensor import Tensor
from deepnorm_lab.config.models import NormVariant
from deepnorm_lab.runtime.errors import DimensionError, InputError

SubLayerFn = Callable[[Tensor], Tensor]
LnObserver = Callable[[Tensor], None]


@dataclass(frozen=True, slots=True)
class NormScheme:
    """``post_ln``, ``pre_ln``, ``no_ln`` or ``deepnorm`` with its residual weight alpha."""

    variant: NormVariant
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.variant == "deepnorm" and self.alpha < 1.0:
            raise InputError(f"deepnorm alpha must be >= 1, got {self.alpha}")
        if self.variant != "deepnorm" and self.alpha != 1.0:
            raise InputError(f"{self.variant} has no residual weight, got alpha={self.alpha}")

    @classmethod
    def deepnorm(cls, alpha: float) -> NormScheme:
        return cls("deepnorm", alpha)

    @property
    def label(self) -> str:
        return f"deepnorm({self.alpha:.6g})" if self.variant == "deepnorm" else self.variant


def apply_residual(
    scheme: NormScheme,
    x: Tensor,
    sublayer: SubLayerFn,
    eps: float = ops.DEFAULT_LN_EPS,
    *,
    ln_gain: Tensor | None = None,
    ln_bias: Tensor | None = None,
    observe_ln_input: LnObserver | None = None,
) -> Tensor:
    """Compose ``x`` with ``sublayer`` per ``scheme``.

    post_ln: ``LN(x + G(x))``; pre_ln: ``x + G(LN(x))``; no_ln: ``x + G(x)``;
    deepnorm: ``LN(alpha x + G(x))``. ``observe_ln_input`` receives the tensor
    entering the LayerNorm, if the scheme has one.
    """

    def checked(inner: Tensor) -> Tensor:
        out = sublayer(inner)
        if out.shape != x.shape:
            raise DimensionError(f"sublayer output {out.shape} != residual input {x.shape}")
        return out

    def normalize(value: Tensor) -> Tensor:
        if observe_ln_input is not None:
            observe_ln_input(value)
        return ops.layer_norm(value, eps, gain=ln_gain, bias=ln_bias)

    if scheme.variant == "pre_ln":
        return ops.add(x, checked(normalize(x)))
    if scheme.variant == "no_ln":
        return ops.add(x, checked(x))

    branch = checked(x)
    residual = x if scheme.alpha == 1.0 else ops.scale(x, scheme.alpha)
    return normalize(ops.add(residual, branch))
