"""Minimal reverse-mode automatic differentiation over float64 arrays.

Just enough operations for the models in this package: elementwise
arithmetic, two-operand einsum, relu, log-softmax, reductions, reshaping,
slicing, and concatenation.  Gradients are validated against central
finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    """A float64 array plus the tape bookkeeping for backprop."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without grad needs a scalar")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen = set()

        def visit(t: Tensor):
            if id(t) in seen or not t.requires_grad:
                return
            seen.add(id(t))
            for p in t._parents:
                visit(p)
            topo.append(t)

        visit(self)
        # leaves keep accumulating across calls until zero_grad; fresh
        # intermediates start at None every forward pass
        for t in topo:
            if t.grad is None:
                t.grad = np.zeros_like(t.data)
        incoming = np.asarray(grad, dtype=np.float64).reshape(self.data.shape)
        self.grad = self.grad + incoming
        for t in reversed(topo):
            if t._backward is not None:
                t._backward(t.grad)

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __getitem__(self, key):
        return getitem(self, key)

    def reshape(self, *shape):
        return reshape(self, shape)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(p for p in parents if p.requires_grad)
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sums grad over the axes that broadcasting expanded."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, size in enumerate(shape):
        if size == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data + b.data

    def backward(g):
        if a.requires_grad:
            a.grad += _unbroadcast(g, a.data.shape)
        if b.requires_grad:
            b.grad += _unbroadcast(g, b.data.shape)

    return _make(data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data * b.data

    def backward(g):
        if a.requires_grad:
            a.grad += _unbroadcast(g * b.data, a.data.shape)
        if b.requires_grad:
            b.grad += _unbroadcast(g * a.data, b.data.shape)

    return _make(data, (a, b), backward)


def einsum(spec: str, a, b) -> Tensor:
    """Two-operand einsum with gradients by index rearrangement.

    Requires every index of each operand to appear in the output or in the
    other operand, and no repeated index within one operand; that covers
    matrix products, bilinear forms, and batched contractions.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    inputs, out_spec = spec.replace(" ", "").split("->")
    a_spec, b_spec = inputs.split(",")
    for one, other in ((a_spec, b_spec), (b_spec, a_spec)):
        if len(set(one)) != len(one):
            raise ValueError(f"repeated index within operand: {spec!r}")
        if not set(one) <= set(other) | set(out_spec):
            raise ValueError(f"unsupported contraction: {spec!r}")
    data = np.einsum(spec, a.data, b.data)

    def backward(g):
        if a.requires_grad:
            a.grad += np.einsum(f"{out_spec},{b_spec}->{a_spec}", g, b.data)
        if b.requires_grad:
            b.grad += np.einsum(f"{out_spec},{a_spec}->{b_spec}", g, a.data)

    return _make(data, (a, b), backward)


def relu(a) -> Tensor:
    a = _as_tensor(a)
    data = np.maximum(a.data, 0.0)

    def backward(g):
        a.grad += g * (a.data > 0.0)

    return _make(data, (a,), backward)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    data = shifted - logsum

    def backward(g):
        soft = np.exp(data)
        a.grad += g - soft * g.sum(axis=axis, keepdims=True)

    return _make(data, (a,), backward)


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            a.grad += np.broadcast_to(g, a.data.shape)
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a.grad += np.broadcast_to(g, a.data.shape)

    return _make(data, (a,), backward)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(a, shape) -> Tensor:
    a = _as_tensor(a)
    data = a.data.reshape(shape)

    def backward(g):
        a.grad += g.reshape(a.data.shape)

    return _make(data, (a,), backward)


def transpose(a, axes) -> Tensor:
    a = _as_tensor(a)
    data = np.transpose(a.data, axes)
    inverse = np.argsort(axes)

    def backward(g):
        a.grad += np.transpose(g, inverse)

    return _make(data, (a,), backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    offsets = np.cumsum([0] + [t.data.shape[axis] for t in tensors])

    def backward(g):
        for t, start, stop in zip(tensors, offsets, offsets[1:]):
            if t.requires_grad:
                index = [slice(None)] * g.ndim
                index[axis] = slice(start, stop)
                t.grad += g[tuple(index)]

    return _make(data, tuple(tensors), backward)


def getitem(a, key) -> Tensor:
    a = _as_tensor(a)
    data = a.data[key]

    def backward(g):
        scatter = np.zeros_like(a.data)
        np.add.at(scatter, key, g)
        a.grad += scatter

    return _make(data, (a,), backward)


def softmax(a, axis: int = -1) -> np.ndarray:
    """Plain ndarray softmax for inference paths."""
    a = np.asarray(a, dtype=np.float64)
    shifted = a - a.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


class AdamW:
    """Adam with decoupled weight decay."""

    def __init__(self, params: list[Tensor], lr: float,
                 betas: tuple[float, float] = (0.9, 0.999),
                 weight_decay: float = 0.0, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.weight_decay = weight_decay
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]

    def step(self):
        self.step_count += 1
        t = self.step_count
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                continue
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1 ** t)
            vhat = self.v[i] / (1 - self.beta2 ** t)
            p.data -= self.lr * (mhat / (np.sqrt(vhat) + self.eps)
                                 + self.weight_decay * p.data)

    def zero_grad(self):
        for p in self.params:
            p.grad = None
