"""Dense float64 tensors with reverse-mode automatic differentiation.

The computation graph is dynamic: every operation returns a fresh node
holding references to its parents and a closure that routes the incoming
gradient to them.  ``backward`` walks the graph once in reverse
topological order, so each parameter accumulates the exact derivative of
the scalar root.  Everything is double precision and single threaded;
identical inputs give bit-identical outputs.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ShapeMismatchError",
    "Tensor",
    "parameter",
    "constant",
    "add",
    "mul",
    "matvec",
    "concat",
    "row",
    "vsum",
    "dot",
    "tanh",
    "sigmoid",
    "softmax_cross_entropy",
    "backward",
    "zero_grads",
    "glorot_uniform",
]


class ShapeMismatchError(ValueError):
    """An operand has an incompatible shape; the message names the operand."""

    def __init__(self, operand: str, detail: str):
        self.operand = operand
        super().__init__(f"{operand}: {detail}")


class Tensor:
    """A node in the computation graph wrapping a float64 ndarray."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)


def parameter(data, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def constant(data, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=False, name=name)


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out)) for a [rows, cols] weight."""
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor(data)
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = parents
        out._backward = backward_fn
    return out


def _check_vector(t: Tensor, operand: str) -> None:
    if t.data.ndim != 1:
        raise ShapeMismatchError(operand, f"expected a vector, got shape {t.data.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(
            "add rhs", f"shape {b.data.shape} does not match lhs shape {a.data.shape}"
        )
    out = _node(a.data + b.data, (a, b), None)

    def backprop():
        g = out.grad
        if a.requires_grad:
            _accumulate(a, g)
        if b.requires_grad:
            _accumulate(b, g)

    out._backward = backprop
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of same-shape tensors."""
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(
            "mul rhs", f"shape {b.data.shape} does not match lhs shape {a.data.shape}"
        )
    out = _node(a.data * b.data, (a, b), None)

    def backprop():
        g = out.grad
        if a.requires_grad:
            _accumulate(a, g * b.data)
        if b.requires_grad:
            _accumulate(b, g * a.data)

    out._backward = backprop
    return out


def matvec(w: Tensor, x: Tensor) -> Tensor:
    """Matrix-vector product: [m, n] @ [n] -> [m]."""
    if w.data.ndim != 2:
        raise ShapeMismatchError("w", f"expected a matrix, got shape {w.data.shape}")
    _check_vector(x, "x")
    if w.data.shape[1] != x.data.shape[0]:
        raise ShapeMismatchError(
            "x", f"length {x.data.shape[0]} does not match matrix columns {w.data.shape[1]}"
        )
    out = _node(w.data @ x.data, (w, x), None)

    def backprop():
        g = out.grad
        if w.requires_grad:
            _accumulate(w, np.outer(g, x.data))
        if x.requires_grad:
            _accumulate(x, w.data.T @ g)

    out._backward = backprop
    return out


def concat(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate 1-D tensors into one vector."""
    if not parts:
        raise ValueError("concat: empty part list")
    for i, p in enumerate(parts):
        _check_vector(p, f"part {i}")
    parts = tuple(parts)
    out = _node(np.concatenate([p.data for p in parts]), parts, None)
    offsets = np.cumsum([0] + [p.data.shape[0] for p in parts])

    def backprop():
        g = out.grad
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                _accumulate(p, g[lo:hi])

    out._backward = backprop
    return out


def row(m: Tensor, index: int) -> Tensor:
    """Select row ``index`` of a matrix (embedding lookup)."""
    if m.data.ndim != 2:
        raise ShapeMismatchError("m", f"expected a matrix, got shape {m.data.shape}")
    if not 0 <= index < m.data.shape[0]:
        raise IndexError(f"row {index} out of range for matrix with {m.data.shape[0]} rows")
    out = _node(m.data[index].copy(), (m,), None)

    def backprop():
        if m.requires_grad:
            if m.grad is None:
                m.grad = np.zeros_like(m.data)
            m.grad[index] += out.grad

    out._backward = backprop
    return out


def vsum(a: Tensor) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    out = _node(np.asarray(a.data.sum()), (a,), None)

    def backprop():
        if a.requires_grad:
            _accumulate(a, np.full_like(a.data, float(out.grad)))

    out._backward = backprop
    return out


def dot(a: Tensor, b: Tensor) -> Tensor:
    return vsum(mul(a, b))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    out = _node(y, (a,), None)

    def backprop():
        if a.requires_grad:
            _accumulate(a, out.grad * (1.0 - y * y))

    out._backward = backprop
    return out


def _expit(x: np.ndarray) -> np.ndarray:
    # Branch on sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    y = _expit(a.data)
    out = _node(y, (a,), None)

    def backprop():
        if a.requires_grad:
            _accumulate(a, out.grad * y * (1.0 - y))

    out._backward = backprop
    return out


def softmax_cross_entropy(logits: Tensor, target: int) -> Tensor:
    """Negative log softmax probability of ``target``, max-shifted for stability."""
    _check_vector(logits, "logits")
    k = logits.data.shape[0]
    if not 0 <= target < k:
        raise ValueError(f"target {target} out of range for {k} classes")
    shifted = logits.data - logits.data.max()
    exp = np.exp(shifted)
    total = exp.sum()
    probs = exp / total
    loss = np.log(total) - shifted[target]
    out = _node(np.asarray(loss), (logits,), None)

    def backprop():
        if logits.requires_grad:
            g = probs.copy()
            g[target] -= 1.0
            _accumulate(logits, float(out.grad) * g)

    out._backward = backprop
    return out


def _topo_order(root: Tensor) -> list[Tensor]:
    # Iterative DFS; long sentences produce graphs deeper than the
    # interpreter recursion limit.
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(root: Tensor) -> None:
    """Populate ``grad`` on every requires_grad tensor reachable from ``root``.

    ``root`` must be a scalar.  Gradients accumulate, so zero them between
    independent passes.
    """
    if root.data.size != 1:
        raise ValueError(f"backward: root must be a scalar, got shape {root.data.shape}")
    if not root.requires_grad:
        return
    order = _topo_order(root)
    if root.grad is None:
        root.grad = np.zeros_like(root.data)
    root.grad += np.ones_like(root.data)
    for node in reversed(order):
        if node._backward is not None:
            node._backward()


def zero_grads(params: Iterable[Tensor]) -> None:
    """Reset gradients to zero arrays (making them present for the optimizer)."""
    for p in params:
        p.grad = np.zeros_like(p.data)
