"""Dense float64 tensors with define-by-run reverse-mode differentiation.

Every differentiable operation appends a :class:`Node` to the active
:class:`ComputationTape` when at least one of its inputs requires a gradient.
:func:`backward` replays that tape in reverse, visiting each node once, and then
resets it.  Only leaf tensors keep their ``grad`` afterwards.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from ..errors import ShapeError, UsageError

BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


@dataclass
class Node:
    output: "Tensor"
    inputs: tuple["Tensor", ...]
    backward: BackwardFn
    op: str


class ComputationTape:
    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self.enabled = True

    def record(self, node: Node) -> None:
        self.nodes.append(node)

    def reset(self) -> None:
        self.nodes.clear()

    def __len__(self) -> int:
        return len(self.nodes)


_TAPE = ComputationTape()


def get_tape() -> ComputationTape:
    return _TAPE


def is_grad_enabled() -> bool:
    return _TAPE.enabled


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without recording anything on the tape."""
    prev = _TAPE.enabled
    _TAPE.enabled = False
    try:
        yield
    finally:
        _TAPE.enabled = prev


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _as_tensor(x: "Tensor | float | np.ndarray") -> "Tensor":
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    """A float64 array plus optional gradient.

    Storage is a C-contiguous numpy array, i.e. flat row-major data with an
    explicit shape.
    """

    __array_priority__ = 1000

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.array(data, dtype=np.float64, order="C")
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._is_leaf = True

    @classmethod
    def _result(cls, data: np.ndarray, inputs: tuple["Tensor", ...], backward: BackwardFn, op: str) -> "Tensor":
        out = cls.__new__(Tensor)
        data = np.asarray(data, dtype=np.float64)
        out.data = data if data.flags.c_contiguous else np.ascontiguousarray(data)
        out.grad = None
        out.name = None
        out._is_leaf = False
        out.requires_grad = _TAPE.enabled and any(t.requires_grad for t in inputs)
        if out.requires_grad:
            _TAPE.record(Node(out, inputs, backward, op))
        return out

    # -- basic properties -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.size == 1 else float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def __len__(self) -> int:
        return self.shape[0]

    # -- elementwise arithmetic -------------------------------------------
    def __add__(self, other):
        other = _as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._result(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
            "add",
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._result(
            self.data - other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)),
            "sub",
        )

    def __rsub__(self, other):
        return _as_tensor(other) - self

    def __neg__(self):
        return Tensor._result(-self.data, (self,), lambda g: (-g,), "neg")

    def __mul__(self, other):
        other = _as_tensor(other)
        a, b = self.data, other.data
        return Tensor._result(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
            "mul",
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_tensor(other)
        a, b = self.data, other.data
        return Tensor._result(
            a / b,
            (self, other),
            lambda g: (_unbroadcast(g / b, a.shape), _unbroadcast(-g * a / (b * b), b.shape)),
            "div",
        )

    def __rtruediv__(self, other):
        return _as_tensor(other) / self

    def __pow__(self, exponent: float):
        if isinstance(exponent, Tensor):
            raise UsageError("only constant exponents are supported")
        a = self.data
        p = float(exponent)
        return Tensor._result(a**p, (self,), lambda g: (g * p * a ** (p - 1.0),), "pow")

    def __matmul__(self, other):
        return matmul(self, other)

    # -- unary functions ---------------------------------------------------
    def exp(self) -> "Tensor":
        y = np.exp(self.data)
        return Tensor._result(y, (self,), lambda g: (g * y,), "exp")

    def log(self) -> "Tensor":
        a = self.data
        return Tensor._result(np.log(a), (self,), lambda g: (g / a,), "log")

    def sqrt(self) -> "Tensor":
        y = np.sqrt(self.data)
        return Tensor._result(y, (self,), lambda g: (g / (2.0 * y),), "sqrt")

    def tanh(self) -> "Tensor":
        y = np.tanh(self.data)
        return Tensor._result(y, (self,), lambda g: (g * (1.0 - y * y),), "tanh")

    # -- reductions --------------------------------------------------------
    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape
        axes = _norm_axes(axis, self.ndim)

        def back(g):
            if not keepdims:
                g = np.expand_dims(g, axes)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._result(self.data.sum(axis=axes, keepdims=keepdims), (self,), back, "sum")

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        axes = _norm_axes(axis, self.ndim)
        count = int(np.prod([self.shape[a] for a in axes])) if axes else 1
        return self.sum(axis=axes, keepdims=keepdims) * (1.0 / count)

    # -- shape manipulation ------------------------------------------------
    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        src = self.shape
        return Tensor._result(self.data.reshape(shape), (self,), lambda g: (g.reshape(src),), "reshape")

    def swapaxes(self, a: int, b: int) -> "Tensor":
        return Tensor._result(np.swapaxes(self.data, a, b), (self,), lambda g: (np.swapaxes(g, a, b),), "swapaxes")

    @property
    def T(self) -> "Tensor":
        return self.swapaxes(-1, -2)

    def broadcast_to(self, shape: tuple[int, ...]) -> "Tensor":
        src = self.shape
        return Tensor._result(
            np.broadcast_to(self.data, shape), (self,), lambda g: (_unbroadcast(g, src),), "broadcast"
        )

    def __getitem__(self, index) -> "Tensor":
        src = self.shape

        def back(g):
            full = np.zeros(src)
            np.add.at(full, index, g)
            return (full,)

        return Tensor._result(self.data[index], (self,), back, "getitem")


def _norm_axes(axis, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % ndim for a in axis)


def tensor(data, requires_grad: bool = False, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes; leading axes broadcast."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    x, y = a.data, b.data

    def back(g):
        ga = _unbroadcast(g @ np.swapaxes(y, -1, -2), x.shape) if a.requires_grad else None
        gb = _unbroadcast(np.swapaxes(x, -1, -2) @ g, y.shape) if b.requires_grad else None
        return ga, gb

    return Tensor._result(x @ y, (a, b), back, "matmul")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    ndim = tensors[0].ndim
    axis = axis % ndim
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor._result(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), back, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    out_ndim = tensors[0].ndim + 1
    axis = axis % out_ndim

    def back(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._result(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), back, "stack")


def backward(loss: Tensor) -> None:
    """Populate ``grad`` on every leaf that requires one and feeds ``loss``.

    Gradients accumulate into existing ``grad`` buffers, so call
    ``zero_grad`` on parameters between steps.
    """
    if loss.size != 1 or loss.ndim > 1 or (loss.ndim == 1 and loss.shape != (1,)):
        raise UsageError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise UsageError("loss does not depend on any tensor that requires grad")
    tape = _TAPE
    loss.grad = np.ones_like(loss.data)
    for node in reversed(tape.nodes):
        out = node.output
        if out.grad is None:
            continue
        grads = node.backward(out.grad)
        for inp, g in zip(node.inputs, grads):
            if g is None or not inp.requires_grad:
                continue
            if inp.grad is None:
                inp.grad = np.array(g, dtype=np.float64)
            else:
                inp.grad = inp.grad + g
        if not out._is_leaf:
            out.grad = None
    tape.reset()
