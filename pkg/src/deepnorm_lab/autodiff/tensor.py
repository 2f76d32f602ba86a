"""Dense f64 tensors and the reverse-mode recording tape."""

from __future__ import annotations

import contextvars
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from deepnorm_lab.runtime.errors import DimensionError

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_ACTIVE_TAPE: contextvars.ContextVar[Tape | None] = contextvars.ContextVar(
    "deepnorm_active_tape",
    default=None,
)


class Tensor:
    """Row-major f64 array that may participate in a :class:`Tape`."""

    __slots__ = ("data", "grad", "name", "requires_grad")

    def __init__(
        self,
        data: Any,
        *,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        array = np.asarray(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1)
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> Tensor:
        return Tensor(self.data.copy(), name=self.name)

    def numpy(self) -> np.ndarray:
        return self.data

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other: Tensor | float) -> Tensor:
        from deepnorm_lab.autodiff import ops

        return ops.add(self, ops.as_tensor(other))

    __radd__ = __add__

    def __sub__(self, other: Tensor | float) -> Tensor:
        from deepnorm_lab.autodiff import ops

        return ops.sub(self, ops.as_tensor(other))

    def __mul__(self, other: Tensor | float) -> Tensor:
        from deepnorm_lab.autodiff import ops

        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self) -> Tensor:
        from deepnorm_lab.autodiff import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other: Tensor) -> Tensor:
        from deepnorm_lab.autodiff import ops

        return ops.matmul(self, other)


@dataclass(slots=True)
class Node:
    """One recorded primitive: its output, parents and vector-Jacobian product."""

    op: str
    output: Tensor
    parents: tuple[Tensor, ...]
    backward: BackwardFn


@dataclass(slots=True)
class Tape:
    """Ordered record of primitive operations.

    Use as a context manager; primitives executed inside the ``with`` block and
    touching a tensor with ``requires_grad`` are appended in execution order.
    ``backward`` replays the nodes in exact reverse order, so two identical
    programs always accumulate gradients in the same sequence.
    """

    nodes: list[Node] = field(default_factory=list)
    _token: contextvars.Token[Tape | None] | None = None

    def __enter__(self) -> Tape:
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *_exc: object) -> None:
        if self._token is not None:
            _ACTIVE_TAPE.reset(self._token)
            self._token = None

    def record(self, node: Node) -> None:
        self.nodes.append(node)

    def backward(self, output: Tensor, seed: np.ndarray | None = None) -> None:
        """Propagate ``seed`` (default ones) from ``output`` to every recorded parent."""
        if seed is None:
            seed = np.ones_like(output.data)
        elif seed.shape != output.data.shape:
            raise DimensionError(f"seed shape {seed.shape} != output shape {output.shape}")
        output.grad = np.array(seed, dtype=np.float64)

        for node in reversed(self.nodes):
            upstream = node.output.grad
            if upstream is None:
                continue
            parent_grads = node.backward(upstream)
            for parent, parent_grad in zip(node.parents, parent_grads, strict=True):
                if parent_grad is None or not parent.requires_grad:
                    continue
                accumulate_grad(parent, parent_grad)

    def clear(self) -> None:
        self.nodes.clear()


def accumulate_grad(tensor: Tensor, grad: np.ndarray) -> None:
    """In-place gradient sum; ``grad`` must already match ``tensor.shape``."""
    if grad.shape != tensor.data.shape:
        raise DimensionError(f"gradient shape {grad.shape} != tensor shape {tensor.shape}")
    if tensor.grad is None:
        tensor.grad = np.array(grad, dtype=np.float64, copy=True)
    else:
        np.add(tensor.grad, grad, out=tensor.grad)


def active_tape() -> Tape | None:
    return _ACTIVE_TAPE.get()


@contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without recording, even inside an outer tape."""
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)


def make_result(
    op: str,
    data: np.ndarray,
    parents: tuple[Tensor, ...],
    backward: BackwardFn,
) -> Tensor:
    """Wrap ``data`` as an op output and record it when any parent needs gradients."""
    tape = _ACTIVE_TAPE.get()
    needs_grad = tape is not None and any(parent.requires_grad for parent in parents)
    out = Tensor(data, requires_grad=needs_grad)
    if needs_grad and tape is not None:
        tape.record(Node(op=op, output=out, parents=parents, backward=backward))
    return out
