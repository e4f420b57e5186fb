"""Dense float64 tensors with reverse-mode automatic differentiation.

The graph is recorded dynamically: each operation on tracked tensors yields a
node holding its parent tensors and a closure that routes the incoming
gradient to them.  ``backward()`` on a scalar visits the recorded nodes once
in reverse topological order, so gradient accumulation happens in a fixed
order and repeated runs over a rebuilt graph are bit-identical.

Broadcasting is deliberately narrow: elementwise ops accept exactly matching
shapes, or one scalar (0-d) operand.  Graphs are confined to the thread that
built them; ``no_grad()`` disables recording for inference.
"""
from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Sequence

import numpy as np

from .errors import ContractError, DomainError, ShapeError

_local = threading.local()


def grad_enabled() -> bool:
    return getattr(_local, "grad_enabled", True)


@contextmanager
def no_grad():
    """Run the block without recording graph nodes."""
    prev = grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = prev


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 stream; every random draw in the package comes from one."""
    return np.random.Generator(np.random.PCG64(seed))


class Tensor:
    """N-d float64 array, optionally a node in the gradient graph."""

    __slots__ = ("data", "requires_grad", "_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False,
                 _parents: tuple = (), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self._grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def grad(self) -> np.ndarray:
        """Accumulated gradient; zeros for tensors backward never reached."""
        if self._grad is None:
            return np.zeros_like(self.data)
        return self._grad

    def zero_grad(self) -> None:
        self._grad = None

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # ---- elementwise arithmetic -------------------------------------

    def __add__(self, other):
        a, b = self, _coerce(other)
        _check_elementwise(a, b, "add")
        out = a.data + b.data

        def backward(g):
            _accumulate(a, _match_shape(g, a.shape))
            _accumulate(b, _match_shape(g, b.shape))

        return _node(out, (a, b), backward)

    __radd__ = __add__

    def __mul__(self, other):
        a, b = self, _coerce(other)
        _check_elementwise(a, b, "mul")
        out = a.data * b.data

        def backward(g):
            _accumulate(a, _match_shape(g * b.data, a.shape))
            _accumulate(b, _match_shape(g * a.data, b.shape))

        return _node(out, (a, b), backward)

    __rmul__ = __mul__

    def __neg__(self):
        a = self

        def backward(g):
            _accumulate(a, -g)

        return _node(-a.data, (a,), backward)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("division by a Tensor is not supported; multiply by a reciprocal")
        return self * (1.0 / float(other))

    # ---- matrix product ---------------------------------------------

    def __matmul__(self, other):
        a, b = self, _coerce(other)
        ad, bd = a.data, b.data
        ok = (
            (ad.ndim == 2 and bd.ndim == 2 and ad.shape[1] == bd.shape[0])
            or (ad.ndim == 1 and bd.ndim == 2 and ad.shape[0] == bd.shape[0])
            or (ad.ndim == 2 and bd.ndim == 1 and ad.shape[1] == bd.shape[0])
        )
        if not ok:
            raise ShapeError(f"matmul: incompatible shapes {ad.shape} and {bd.shape}")
        out = ad @ bd

        def backward(g):
            if ad.ndim == 2 and bd.ndim == 2:
                _accumulate(a, g @ bd.T)
                _accumulate(b, ad.T @ g)
            elif ad.ndim == 1:            # (k,) @ (k,n) -> (n,)
                _accumulate(a, bd @ g)
                _accumulate(b, np.outer(ad, g))
            else:                          # (m,k) @ (k,) -> (m,)
                _accumulate(a, np.outer(g, bd))
                _accumulate(b, ad.T @ g)

        return _node(out, (a, b), backward)

    # ---- nonlinearities ----------------------------------------------

    def tanh(self):
        a = self
        out = np.tanh(a.data)

        def backward(g):
            _accumulate(a, g * (1.0 - out * out))

        return _node(out, (a,), backward)

    def relu(self):
        a = self
        out = np.maximum(a.data, 0.0)

        def backward(g):
            _accumulate(a, g * (a.data > 0.0))

        return _node(out, (a,), backward)

    def exp(self):
        a = self
        out = np.exp(a.data)

        def backward(g):
            _accumulate(a, g * out)

        return _node(out, (a,), backward)

    def log(self):
        a = self
        if a.data.size and np.min(a.data) <= 0.0:
            raise DomainError("log of a non-positive value")
        out = np.log(a.data)

        def backward(g):
            _accumulate(a, g / a.data)

        return _node(out, (a,), backward)

    # ---- reductions and indexing --------------------------------------

    def sum(self, axis: int | None = None):
        a = self
        if axis is None:
            out = a.data.sum()

            def backward(g):
                _accumulate(a, np.broadcast_to(g, a.shape).copy())

            return _node(out, (a,), backward)
        if not -a.ndim <= axis < a.ndim:
            raise ShapeError(f"sum axis {axis} out of range for shape {a.shape}")
        out = a.data.sum(axis=axis)

        def backward(g):
            _accumulate(a, np.broadcast_to(np.expand_dims(g, axis), a.shape).copy())

        return _node(out, (a,), backward)

    def __getitem__(self, key):
        a = self
        if isinstance(key, (int, np.integer)):
            key = int(key)
        elif isinstance(key, slice):
            if key.step not in (None, 1):
                raise ShapeError("strided slicing is not supported")
        else:
            raise TypeError(f"unsupported index {key!r}")
        out = a.data[key]

        def backward(g):
            full = np.zeros_like(a.data)
            full[key] = g
            _accumulate(a, full)

        return _node(out, (a,), backward)

    # ---- backward pass -------------------------------------------------

    def backward(self) -> None:
        """Populate ``grad`` on every tracked tensor this scalar depends on."""
        if self.ndim != 0:
            raise ContractError(f"backward requires a scalar, got shape {self.shape}")
        if not self.requires_grad:
            raise ContractError("backward on a tensor with no tracked inputs")
        self._grad = np.ones((), dtype=np.float64)
        for node in reversed(self._topo()):
            if node._backward is not None and node._grad is not None:
                node._backward(node._grad)

    def _topo(self) -> list:
        # Iterative DFS; parent order fixes the visit order, so accumulation
        # order (and therefore float rounding) is identical across runs.
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        return order


# ---- free functions ------------------------------------------------------


def _coerce(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    if isinstance(x, (int, float, np.integer, np.floating)):
        return Tensor(float(x))
    raise TypeError(f"cannot mix Tensor with {type(x).__name__}")


def _check_elementwise(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape or a.ndim == 0 or b.ndim == 0:
        return
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not match "
                     "(only exact match or a scalar operand)")


def _match_shape(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    # Undo scalar broadcast: a 0-d operand collects the sum of the gradient.
    if g.shape == shape:
        return g
    return np.asarray(g.sum(), dtype=np.float64)


def _node(data, parents, backward) -> Tensor:
    if grad_enabled() and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward)
    return Tensor(data)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    t._grad = g if t._grad is None else t._grad + g


def softmax(t: Tensor, axis: int = -1) -> Tensor:
    """Normalized exponentials along ``axis``; stable under large inputs."""
    if t.data.size == 0:
        raise ShapeError("softmax of an empty tensor")
    if not np.all(np.isfinite(t.data)):
        raise DomainError("softmax input must be finite")
    shifted = t.data - t.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        _accumulate(t, (g - inner) * out)

    return _node(out, (t,), backward)


def log_softmax(t: Tensor, axis: int = -1) -> Tensor:
    if t.data.size == 0:
        raise ShapeError("log_softmax of an empty tensor")
    if not np.all(np.isfinite(t.data)):
        raise DomainError("log_softmax input must be finite")
    shifted = t.data - t.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        _accumulate(t, g - np.exp(out) * g.sum(axis=axis, keepdims=True))

    return _node(out, (t,), backward)


def logsumexp(t: Tensor) -> Tensor:
    """log(sum(exp(t))) over all elements, as a scalar; max-shifted for stability."""
    if t.data.size == 0:
        raise ShapeError("logsumexp of an empty tensor")
    m = t.data.max()
    out = np.asarray(m + np.log(np.exp(t.data - m).sum()), dtype=np.float64)

    def backward(g):
        _accumulate(t, g * np.exp(t.data - out))

    return _node(out, (t,), backward)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Join same-shaped tensors along a new leading axis."""
    if len(tensors) == 0:
        raise ShapeError("stack of an empty sequence")
    shape = tensors[0].shape
    for t in tensors:
        if t.shape != shape:
            raise ShapeError(f"stack: mixed shapes {shape} and {t.shape}")
    out = np.stack([t.data for t in tensors])

    def backward(g):
        for i, t in enumerate(tensors):
            _accumulate(t, g[i])

    return _node(out, tuple(tensors), backward)
