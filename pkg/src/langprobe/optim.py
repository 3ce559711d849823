"""Adam optimizer over lists of parameter tensors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor

__all__ = ["AdamState", "init_adam", "adam_step"]


@dataclass
class AdamState:
    """First/second moment accumulators plus the step counter ``t``."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def init_adam(
    params: list[Tensor],
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    return AdamState(
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
        t=0,
        m=[np.zeros_like(p.data) for p in params],
        v=[np.zeros_like(p.data) for p in params],
    )


def adam_step(params: list[Tensor], state: AdamState) -> None:
    """Bias-corrected Adam update, in place; every parameter needs a gradient."""
    if len(params) != len(state.m):
        raise ValueError(
            f"adam_step: {len(params)} parameters but state was built for {len(state.m)}"
        )
    state.t += 1
    t = state.t
    b1, b2 = state.beta1, state.beta2
    for idx, p in enumerate(params):
        if p.grad is None:
            label = p.name or f"parameter {idx}"
            raise ValueError(f"adam_step: {label} has no gradient")
        g = p.grad
        state.m[idx] = b1 * state.m[idx] + (1.0 - b1) * g
        state.v[idx] = b2 * state.v[idx] + (1.0 - b2) * (g * g)
        m_hat = state.m[idx] / (1.0 - b1**t)
        v_hat = state.v[idx] / (1.0 - b2**t)
        p.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
