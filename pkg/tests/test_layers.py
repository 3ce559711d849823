"""LSTM layer tests against a loop-based scalar oracle (no tensor library)."""
import math

import numpy as np
import pytest

from langprobe.autodiff import ShapeMismatchError, constant, parameter
from langprobe.layers import (
    LstmParams,
    bilstm_final,
    bilstm_layer,
    init_lstm_params,
    lstm_cell_step,
    run_lstm,
)


def scalar_sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


def scalar_lstm_step(x, h_prev, c_prev, weights, biases):
    """Plain-Python LSTM step over lists; the independent oracle."""
    z = list(x) + list(h_prev)
    hidden = len(h_prev)

    def gate(w, b, squash):
        out = []
        for r in range(hidden):
            s = 0.0
            for j, zj in enumerate(z):
                s += w[r][j] * zj
            out.append(squash(s + b[r]))
        return out

    i = gate(weights["i"], biases["i"], scalar_sigmoid)
    f = gate(weights["f"], biases["f"], scalar_sigmoid)
    o = gate(weights["o"], biases["o"], scalar_sigmoid)
    g = gate(weights["g"], biases["g"], math.tanh)
    c = [f[r] * c_prev[r] + i[r] * g[r] for r in range(hidden)]
    h = [o[r] * math.tanh(c[r]) for r in range(hidden)]
    return h, c


def zero_params(input_size, hidden_size):
    shape = (hidden_size, input_size + hidden_size)
    return LstmParams(
        input_size=input_size,
        hidden_size=hidden_size,
        w_i=parameter(np.zeros(shape)),
        w_f=parameter(np.zeros(shape)),
        w_o=parameter(np.zeros(shape)),
        w_g=parameter(np.zeros(shape)),
        b_i=parameter(np.zeros(hidden_size)),
        b_f=parameter(np.zeros(hidden_size)),
        b_o=parameter(np.zeros(hidden_size)),
        b_g=parameter(np.zeros(hidden_size)),
    )


def random_params(input_size, hidden_size, seed):
    rng = np.random.default_rng(seed)
    return init_lstm_params(input_size, hidden_size, rng)


def as_oracle(p):
    weights = {g: getattr(p, f"w_{g}").data.tolist() for g in "ifog"}
    biases = {g: getattr(p, f"b_{g}").data.tolist() for g in "ifog"}
    return weights, biases


class TestLstmCellStep:
    def test_all_zero_weights_zero_cell(self):
        p = zero_params(3, 2)
        h, c = lstm_cell_step(constant(np.array([5.0, -1.0, 2.0])), constant(np.zeros(2)), constant(np.zeros(2)), p)
        assert np.array_equal(h.data, np.zeros(2))
        assert np.array_equal(c.data, np.zeros(2))

    def test_all_zero_weights_unit_cell(self):
        # gates are fixed at sigmoid(0)=0.5, so c = 0.5 and h = 0.5*tanh(0.5)
        p = zero_params(1, 1)
        h, c = lstm_cell_step(constant(np.array([3.0])), constant(np.zeros(1)), constant(np.ones(1)), p)
        assert c.data[0] == pytest.approx(0.5, abs=1e-15)
        assert h.data[0] == pytest.approx(0.5 * math.tanh(0.5), abs=1e-15)
        assert h.data[0] == pytest.approx(0.23105857863000487, abs=1e-12)

    def test_random_step_matches_scalar_oracle(self):
        p = random_params(3, 3, seed=11)
        rng = np.random.default_rng(5)
        x, h0, c0 = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        h, c = lstm_cell_step(constant(x), constant(h0), constant(c0), p)
        weights, biases = as_oracle(p)
        oh, oc = scalar_lstm_step(x.tolist(), h0.tolist(), c0.tolist(), weights, biases)
        assert np.abs(h.data - np.array(oh)).max() <= 1e-12
        assert np.abs(c.data - np.array(oc)).max() <= 1e-12

    def test_dimension_mismatch_names_operand(self):
        p = zero_params(3, 2)
        with pytest.raises(ShapeMismatchError, match="x"):
            lstm_cell_step(constant(np.zeros(4)), constant(np.zeros(2)), constant(np.zeros(2)), p)
        with pytest.raises(ShapeMismatchError, match="h_prev"):
            lstm_cell_step(constant(np.zeros(3)), constant(np.zeros(3)), constant(np.zeros(2)), p)
        with pytest.raises(ShapeMismatchError, match="c_prev"):
            lstm_cell_step(constant(np.zeros(3)), constant(np.zeros(2)), constant(np.zeros(3)), p)


class TestBilstmLayer:
    def test_length_one_equals_single_steps(self):
        fwd = random_params(2, 3, seed=1)
        bwd = random_params(2, 3, seed=2)
        x = constant(np.array([0.3, -0.7]))
        out = bilstm_layer([x], fwd, bwd)
        assert len(out) == 1
        hf, _ = lstm_cell_step(x, constant(np.zeros(3)), constant(np.zeros(3)), fwd)
        hb, _ = lstm_cell_step(x, constant(np.zeros(3)), constant(np.zeros(3)), bwd)
        assert np.array_equal(out[0].data, np.concatenate([hf.data, hb.data]))

    def test_zero_params_zero_outputs(self):
        fwd = zero_params(2, 3)
        bwd = zero_params(2, 3)
        xs = [constant(np.array([1.0, 2.0])), constant(np.array([-1.0, 0.5]))]
        for h in bilstm_layer(xs, fwd, bwd):
            assert np.array_equal(h.data, np.zeros(6))

    def test_length_three_matches_scalar_oracle(self):
        fwd = random_params(2, 2, seed=3)
        bwd = random_params(2, 2, seed=4)
        rng = np.random.default_rng(9)
        xs = [rng.normal(size=2) for _ in range(3)]
        out = bilstm_layer([constant(x) for x in xs], fwd, bwd)

        fw, fb = as_oracle(fwd)
        bw, bb = as_oracle(bwd)
        h, c = [0.0, 0.0], [0.0, 0.0]
        fwd_states = []
        for x in xs:
            h, c = scalar_lstm_step(x.tolist(), h, c, fw, fb)
            fwd_states.append(h)
        h, c = [0.0, 0.0], [0.0, 0.0]
        bwd_states = []
        for x in reversed(xs):
            h, c = scalar_lstm_step(x.tolist(), h, c, bw, bb)
            bwd_states.append(h)
        bwd_states.reverse()

        for t in range(3):
            expected = np.array(fwd_states[t] + bwd_states[t])
            assert np.abs(out[t].data - expected).max() <= 1e-12

    def test_output_dim_is_twice_hidden(self):
        fwd = random_params(3, 4, seed=5)
        bwd = random_params(3, 4, seed=6)
        for length in (1, 2, 5):
            xs = [constant(np.zeros(3))] * length
            out = bilstm_layer(xs, fwd, bwd)
            assert len(out) == length
            assert all(h.data.shape == (8,) for h in out)

    def test_empty_sequence_rejected(self):
        fwd = zero_params(2, 2)
        bwd = zero_params(2, 2)
        with pytest.raises(ValueError, match="empty"):
            bilstm_layer([], fwd, bwd)
        with pytest.raises(ValueError, match="empty"):
            run_lstm([], fwd)
        with pytest.raises(ValueError, match="empty"):
            bilstm_final([], fwd, bwd)


class TestBilstmFinal:
    def test_final_states_pick_sequence_ends(self):
        fwd = random_params(2, 3, seed=7)
        bwd = random_params(2, 3, seed=8)
        xs = [constant(np.array([float(i), 1.0])) for i in range(4)]
        final = bilstm_final(xs, fwd, bwd)
        f = run_lstm(xs, fwd)
        b = run_lstm(xs, bwd, reverse=True)
        assert np.array_equal(final.data, np.concatenate([f[-1].data, b[0].data]))
        assert final.data.shape == (6,)
