"""Adam tests against an independently written scalar implementation."""
import math

import numpy as np
import pytest

from langprobe.autodiff import add, backward, constant, dot, parameter, zero_grads
from langprobe.optim import adam_step, init_adam


class ScalarAdam:
    """Textbook Adam on a single float; the oracle for the tensor version."""

    def __init__(self, lr, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.lr, self.beta1, self.beta2, self.epsilon = lr, beta1, beta2, epsilon
        self.m = 0.0
        self.v = 0.0
        self.t = 0

    def step(self, w, g):
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g * g
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return w - self.lr * m_hat / (math.sqrt(v_hat) + self.epsilon)


def test_zero_gradient_is_identity():
    p = parameter(np.array([1.0, -2.0, 3.0]))
    state = init_adam([p], lr=0.1)
    for _ in range(5):
        p.grad = np.zeros_like(p.data)
        adam_step([p], state)
    assert np.array_equal(p.data, [1.0, -2.0, 3.0])
    assert state.t == 5


def test_first_step_moves_by_lr_sign():
    for g in (0.37, -2.5, 1e3):
        p = parameter(np.array([0.0]))
        state = init_adam([p], lr=0.01)
        p.grad = np.array([g])
        adam_step([p], state)
        # bias-corrected first step: m_hat/sqrt(v_hat) = g/|g| up to epsilon
        assert p.data[0] == pytest.approx(-0.01 * np.sign(g), rel=1e-6)


def test_missing_gradient_raises():
    p = parameter(np.array([1.0]), name="w")
    state = init_adam([p])
    with pytest.raises(ValueError, match="w"):
        adam_step([p], state)


def test_param_count_mismatch_raises():
    p = parameter(np.array([1.0]))
    q = parameter(np.array([1.0]))
    state = init_adam([p])
    with pytest.raises(ValueError, match="state"):
        adam_step([p, q], state)


def test_second_moment_stays_non_negative():
    p = parameter(np.array([0.5]))
    state = init_adam([p], lr=0.05)
    rng = np.random.default_rng(3)
    for _ in range(50):
        p.grad = rng.normal(size=1)
        adam_step([p], state)
        assert state.v[0][0] >= 0.0


def test_quadratic_trajectory_matches_scalar_oracle():
    # f(w) = (w - 3)^2 minimized from w0 = 0 with lr 0.1; gradients via the graph
    w = parameter(np.array([0.0]))
    shift = constant(np.array([-3.0]))
    state = init_adam([w], lr=0.1)
    oracle = ScalarAdam(lr=0.1)
    ow = 0.0
    for _ in range(100):
        zero_grads([w])
        d = add(w, shift)
        backward(dot(d, d))
        og = 2.0 * (ow - 3.0)
        ow = oracle.step(ow, og)
        adam_step([w], state)
        assert abs(w.data[0] - ow) <= 1e-10
    # 100 steps of lr 0.1 should be most of the way to the minimum
    assert abs(w.data[0] - 3.0) < 1.0
