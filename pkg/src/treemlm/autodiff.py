"""Minimal reverse-mode automatic differentiation over numpy arrays.

A ``Tensor`` wraps an ndarray and records the op that produced it; calling
``backward()`` on a scalar output walks the graph in reverse topological
order and accumulates gradients into every reachable node. Arrays are kept
in float64 so finite-difference checks are meaningful.

Only the ops the path-set transformer needs are implemented. Softmax,
log-softmax and GELU are primitives with hand-written vector-Jacobian
products rather than compositions, which keeps graphs small and avoids
the usual max-subtraction bookkeeping.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _as_array(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        if x.dtype != np.float64:
            return x.astype(np.float64)
        return x
    return np.asarray(x, dtype=np.float64)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """Node in the computation graph. `data` is an ndarray, `grad` matches it."""

    __slots__ = ("data", "grad", "_parents", "_vjp")

    def __init__(self, data, parents=(), vjp=None):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = parents
        # _vjp(grad_out) -> tuple of gradients, one per parent
        self._vjp = vjp

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    # ---- graph construction helpers -------------------------------------

    @staticmethod
    def _lift(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(x)

    def __add__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data
        return Tensor(
            a + b,
            (self, other),
            lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        return self + (-Tensor._lift(other))

    def __rsub__(self, other):
        return Tensor._lift(other) + (-self)

    def __mul__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data
        return Tensor(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Tensor._lift(other)
        return self * other.pow(-1.0)

    def __matmul__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data
        return Tensor(a @ b, (self, other), lambda g: (g @ b.T, a.T @ g))

    def pow(self, exponent: float):
        a = self.data
        out = a ** exponent
        return Tensor(out, (self,), lambda g: (g * exponent * a ** (exponent - 1.0),))

    def exp(self):
        out = np.exp(self.data)
        return Tensor(out, (self,), lambda g: (g * out,))

    def log(self):
        a = self.data
        return Tensor(np.log(a), (self,), lambda g: (g / a,))

    def tanh(self):
        out = np.tanh(self.data)
        return Tensor(out, (self,), lambda g: (g * (1.0 - out * out),))

    def sigmoid(self):
        out = 1.0 / (1.0 + np.exp(-self.data))
        return Tensor(out, (self,), lambda g: (g * out * (1.0 - out),))

    def gelu(self):
        # exact form: 0.5 x (1 + erf(x / sqrt(2)))
        x = self.data
        cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
        pdf = _INV_SQRT2PI * np.exp(-0.5 * x * x)
        return Tensor(x * cdf, (self,), lambda g: (g * (cdf + x * pdf),))

    def sum(self, axis=None, keepdims=False):
        a = self.data

        def vjp(g):
            if axis is None:
                return (np.broadcast_to(g, a.shape).copy(),)
            gg = g if keepdims else np.expand_dims(g, axis)
            return (np.broadcast_to(gg, a.shape).copy(),)

        return Tensor(a.sum(axis=axis, keepdims=keepdims), (self,), vjp)

    def mean(self, axis=None, keepdims=False):
        a = self.data
        n = a.size if axis is None else a.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def reshape(self, *shape):
        a = self.data
        return Tensor(a.reshape(*shape), (self,), lambda g: (g.reshape(a.shape),))

    @property
    def T(self):
        return Tensor(self.data.T, (self,), lambda g: (g.T,))

    def slice_cols(self, start: int, stop: int):
        """Columns [start:stop) of a 2-D tensor."""
        a = self.data

        def vjp(g):
            full = np.zeros_like(a)
            full[:, start:stop] = g
            return (full,)

        return Tensor(a[:, start:stop], (self,), vjp)

    def slice_rows(self, start: int, stop: int):
        a = self.data

        def vjp(g):
            full = np.zeros_like(a)
            full[start:stop] = g
            return (full,)

        return Tensor(a[start:stop], (self,), vjp)

    def take_rows(self, index: np.ndarray):
        """Gather rows by integer index; duplicates accumulate on backward."""
        a = self.data
        index = np.asarray(index, dtype=np.intp)

        def vjp(g):
            full = np.zeros_like(a)
            np.add.at(full, index, g)
            return (full,)

        return Tensor(a[index], (self,), vjp)

    def take_rows_cols(self, cols: np.ndarray):
        """out[i] = self[i, cols[i]] for a 2-D tensor."""
        a = self.data
        rows = np.arange(a.shape[0])
        cols = np.asarray(cols, dtype=np.intp)

        def vjp(g):
            full = np.zeros_like(a)
            np.add.at(full, (rows, cols), g)
            return (full,)

        return Tensor(a[rows, cols], (self,), vjp)

    def softmax(self, axis: int = -1):
        z = self.data - self.data.max(axis=axis, keepdims=True)
        e = np.exp(z)
        out = e / e.sum(axis=axis, keepdims=True)

        def vjp(g):
            inner = (g * out).sum(axis=axis, keepdims=True)
            return (out * (g - inner),)

        return Tensor(out, (self,), vjp)

    def log_softmax(self, axis: int = -1):
        z = self.data - self.data.max(axis=axis, keepdims=True)
        lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
        out = z - lse
        sm = np.exp(out)

        def vjp(g):
            return (g - sm * g.sum(axis=axis, keepdims=True),)

        return Tensor(out, (self,), vjp)

    # ---- backward pass ----------------------------------------------------

    def backward(self, grad=None):
        """Accumulate gradients of this (scalar) tensor into the whole graph."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without grad requires a scalar output")
            grad = np.ones_like(self.data)

        # iterative topological sort; graphs can exceed the recursion limit
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))

        # gradients are only ever rebound, never mutated in place, so views
        # returned by vjps are safe to hold directly
        self.grad = np.asarray(grad, dtype=np.float64).reshape(self.data.shape)
        for node in reversed(topo):
            if node._vjp is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._vjp(node.grad)):
                if parent.grad is None:
                    parent.grad = g
                else:
                    parent.grad = parent.grad + g


def concat_rows(tensors: list[Tensor]) -> Tensor:
    """Stack 2-D tensors along axis 0."""
    datas = [t.data for t in tensors]
    sizes = [d.shape[0] for d in datas]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(g[offsets[i]:offsets[i + 1]] for i in range(len(datas)))

    return Tensor(np.concatenate(datas, axis=0), tuple(tensors), vjp)


def concat_cols(tensors: list[Tensor]) -> Tensor:
    """Stack 2-D tensors along axis 1."""
    datas = [t.data for t in tensors]
    sizes = [d.shape[1] for d in datas]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(g[:, offsets[i]:offsets[i + 1]] for i in range(len(datas)))

    return Tensor(np.concatenate(datas, axis=1), tuple(tensors), vjp)
