"""A small reverse-mode autodiff over numpy arrays.

Only the primitives needed by the surrogate losses are provided: elementwise
arithmetic with broadcasting, batched matmul, reductions, cumulative sums,
a few activations, log-softmax and indexing. Anything else fails loudly:
numpy functions refuse ``Tensor`` operands (``__array_ufunc__ = None``), so
``np.sin(t)`` raises ``TypeError`` while the graph is being built.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


class Tensor:
    __array_ufunc__ = None

    def __init__(self, data, parents=(), backward=None):
        self.data = np.asarray(data, dtype=float)
        self._parents = parents
        self._backward = backward
        self.grad: np.ndarray | None = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.shape})"

    # arithmetic
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, reciprocal(other))
        return mul(self, 1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return mul(as_tensor(other), reciprocal(self))

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if isinstance(exponent, Tensor):
            raise TypeError("tensor exponents are not supported")
        return power(self, float(exponent))

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(as_tensor(other), self)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        n = self.data.size if axis is None else np.prod([self.data.shape[a] for a in np.atleast_1d(axis)])
        return tsum(self, axis, keepdims) * (1.0 / n)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 else shape)

    def swapaxes(self, a, b):
        return swapaxes(self, a, b)

    @property
    def T(self):
        return transpose(self)

    def backward(self):
        """Accumulate ``d self / d node`` into ``node.grad`` for every ancestor."""
        if self.data.size != 1:
            raise ValueError("backward() needs a scalar output")
        order = _topological(self)
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            node.grad = g if node.grad is None else node.grad + g
            if node._backward is None:
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None:
                    continue
                key = id(parent)
                grads[key] = grads[key] + pg if key in grads else pg


def _topological(root: Tensor) -> list[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
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


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def neg(a: Tensor) -> Tensor:
    return Tensor(-a.data, (a,), lambda g: (-g,))


def reciprocal(a: Tensor) -> Tensor:
    out = 1.0 / a.data
    return Tensor(out, (a,), lambda g: (-g * out * out,))


def power(a: Tensor, p: float) -> Tensor:
    return Tensor(a.data**p, (a,), lambda g: (g * p * a.data ** (p - 1),))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError("matmul operands must be at least 2-D")

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return Tensor(a.data @ b.data, (a, b), backward)


def tsum(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return Tensor(out, (a,), backward)


def cumsum(a: Tensor, axis: int = -1) -> Tensor:
    def backward(g):
        return (np.flip(np.cumsum(np.flip(g, axis), axis=axis), axis),)

    return Tensor(np.cumsum(a.data, axis=axis), (a,), backward)


def flip(a: Tensor, axis: int = -1) -> Tensor:
    return Tensor(np.flip(a.data, axis), (a,), lambda g: (np.flip(g, axis),))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return Tensor(out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    return Tensor(np.log(a.data), (a,), lambda g: (g / a.data,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return Tensor(out, (a,), lambda g: (g * (1.0 - out * out),))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return Tensor(a.data * mask, (a,), lambda g: (g * mask,))


def softplus(a: Tensor) -> Tensor:
    sig = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return Tensor(np.logaddexp(0.0, a.data), (a,), lambda g: (g * sig,))


def tabs(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return Tensor(np.abs(a.data), (a,), lambda g: (g * sign,))


def clip_min(a: Tensor, floor: float) -> Tensor:
    """``max(a, floor)``; gradient flows only where ``a > floor``."""
    mask = a.data > floor
    return Tensor(np.where(mask, a.data, floor), (a,), lambda g: (g * mask,))


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    m = a.data.max(axis=axis, keepdims=True)
    shifted = a.data - m
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)

    def backward(g):
        return (g - soft * g.sum(axis=axis, keepdims=True),)

    return Tensor(out, (a,), backward)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    return exp(log_softmax(a, axis))


def _is_basic(idx) -> bool:
    parts = idx if isinstance(idx, tuple) else (idx,)
    return all(isinstance(p, (slice, int, np.integer)) or p is None or p is Ellipsis for p in parts)


def getitem(a: Tensor, idx) -> Tensor:
    basic = _is_basic(idx)

    def backward(g):
        out = np.zeros_like(a.data)
        if basic:
            out[idx] = g
        else:
            # repeated indices must accumulate
            np.add.at(out, idx, g)
        return (out,)

    return Tensor(a.data[idx], (a,), backward)


def take(a: Tensor, indices, axis: int = -1, unique: bool = False) -> Tensor:
    """``np.take`` along ``axis``; pass ``unique=True`` for duplicate-free indices."""
    indices = np.asarray(indices, dtype=int)
    axis = axis % a.ndim
    sel = (slice(None),) * axis + (indices,)

    def backward(g):
        out = np.zeros_like(a.data)
        if unique:
            out[sel] = g
        else:
            np.add.at(out, sel, g)
        return (out,)

    return Tensor(np.take(a.data, indices, axis=axis), (a,), backward)


def reshape(a: Tensor, shape) -> Tensor:
    return Tensor(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def swapaxes(a: Tensor, x: int, y: int) -> Tensor:
    return Tensor(np.swapaxes(a.data, x, y), (a,), lambda g: (np.swapaxes(g, x, y),))


def transpose(a: Tensor) -> Tensor:
    return Tensor(a.data.T, (a,), lambda g: (g.T,))


def concatenate(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, sizes, axis=axis))

    return Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


def where(mask, a, b) -> Tensor:
    """Select with a constant boolean mask."""
    mask = np.asarray(mask, dtype=bool)
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(
        np.where(mask, a.data, b.data),
        (a, b),
        lambda g: (_unbroadcast(g * mask, a.shape), _unbroadcast(g * ~mask, b.shape)),
    )


def value_and_grad(loss: Callable[[Tensor], Tensor], W) -> tuple[float, np.ndarray]:
    """Evaluate ``loss(W)`` and its exact gradient with respect to ``W``."""
    param = Tensor(np.array(W, dtype=float, copy=True))
    out = loss(param)
    if not isinstance(out, Tensor):
        raise TypeError("loss must return a Tensor built from its argument")
    if out.data.size != 1:
        raise ValueError(f"loss must be scalar, got shape {out.shape}")
    out.backward()
    grad = param.grad if param.grad is not None else np.zeros_like(param.data)
    return float(out.data.reshape(())), grad


def grad_loss(loss: Callable[[Tensor], Tensor], W) -> np.ndarray:
    return value_and_grad(loss, W)[1]
