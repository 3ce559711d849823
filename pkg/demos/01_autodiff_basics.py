"""A walk through the tensor core: graphs, gradients, and a finite-difference check.

Run:  python demos/01_autodiff_basics.py
"""
import numpy as np

from langprobe.autodiff import (
    add,
    backward,
    concat,
    constant,
    matvec,
    parameter,
    sigmoid,
    softmax_cross_entropy,
    tanh,
    zero_grads,
)

rng = np.random.default_rng(0)

# A small classifier: logits = W2 @ tanh(W1 @ x + b1), trained-by-hand style.
x = constant(rng.normal(size=6), name="x")
w1 = parameter(rng.normal(size=(5, 6)) * 0.4, name="w1")
b1 = parameter(np.zeros(5), name="b1")
w2 = parameter(rng.normal(size=(3, 5)) * 0.4, name="w2")
params = [w1, b1, w2]


def loss_graph():
    hidden = tanh(add(matvec(w1, x), b1))
    gated = sigmoid(concat([hidden]))
    logits = matvec(w2, gated)
    return softmax_cross_entropy(logits, target=2)


loss = loss_graph()
print(f"loss at initialization: {loss.item():.6f}")

zero_grads(params)
backward(loss)
print("analytic gradient norms:", {p.name: float(np.linalg.norm(p.grad)) for p in params})

# Central finite differences on a few entries as an independent check.
step = 1e-4
print("\nspot checks (analytic vs numeric):")
for p in params:
    flat = p.data.reshape(-1)
    gflat = p.grad.reshape(-1)
    i = int(rng.integers(flat.shape[0]))
    orig = flat[i]
    flat[i] = orig + step
    hi = loss_graph().item()
    flat[i] = orig - step
    lo = loss_graph().item()
    flat[i] = orig
    numeric = (hi - lo) / (2 * step)
    print(f"  {p.name}[{i}]: analytic={gflat[i]:+.8f}  numeric={numeric:+.8f}")

# A few steepest-descent steps drive the loss down.
for it in range(5):
    zero_grads(params)
    current = loss_graph()
    backward(current)
    for p in params:
        p.data -= 0.5 * p.grad
    print(f"step {it + 1}: loss={current.item():.6f}")
