"""LSTM cells and bidirectional layers on top of the autodiff tensors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .autodiff import (
    ShapeMismatchError,
    Tensor,
    add,
    concat,
    constant,
    glorot_uniform,
    matvec,
    mul,
    parameter,
    sigmoid,
    tanh,
)

__all__ = ["LstmParams", "init_lstm_params", "lstm_cell_step", "run_lstm", "bilstm_layer", "bilstm_final"]

GATES = ("i", "f", "o", "g")


@dataclass
class LstmParams:
    """Gate weights and biases for one LSTM direction.

    Each gate weight has shape [hidden_size, input_size + hidden_size] and
    acts on the concatenation [x; h_prev]; each bias has shape [hidden_size].
    """

    input_size: int
    hidden_size: int
    w_i: Tensor
    w_f: Tensor
    w_o: Tensor
    w_g: Tensor
    b_i: Tensor
    b_f: Tensor
    b_o: Tensor
    b_g: Tensor

    def named_tensors(self) -> list[tuple[str, Tensor]]:
        return [(g, getattr(self, g)) for g in ("w_i", "w_f", "w_o", "w_g", "b_i", "b_f", "b_o", "b_g")]


def init_lstm_params(
    input_size: int, hidden_size: int, rng: np.random.Generator, name: str = "lstm"
) -> LstmParams:
    """Glorot-uniform gate weights, zero biases."""
    cols = input_size + hidden_size
    weights = {}
    for gate in GATES:
        weights[f"w_{gate}"] = parameter(
            glorot_uniform(rng, hidden_size, cols), name=f"{name}.w_{gate}"
        )
    biases = {f"b_{gate}": parameter(np.zeros(hidden_size), name=f"{name}.b_{gate}") for gate in GATES}
    return LstmParams(input_size=input_size, hidden_size=hidden_size, **weights, **biases)


def _check_dim(t: Tensor, expected: int, operand: str) -> None:
    if t.data.ndim != 1 or t.data.shape[0] != expected:
        raise ShapeMismatchError(operand, f"expected a vector of length {expected}, got shape {t.data.shape}")


def lstm_cell_step(x: Tensor, h_prev: Tensor, c_prev: Tensor, p: LstmParams) -> tuple[Tensor, Tensor]:
    """One LSTM step: gates from [x; h_prev], then c = f*c_prev + i*g, h = o*tanh(c)."""
    _check_dim(x, p.input_size, "x")
    _check_dim(h_prev, p.hidden_size, "h_prev")
    _check_dim(c_prev, p.hidden_size, "c_prev")
    z = concat([x, h_prev])
    i = sigmoid(add(matvec(p.w_i, z), p.b_i))
    f = sigmoid(add(matvec(p.w_f, z), p.b_f))
    o = sigmoid(add(matvec(p.w_o, z), p.b_o))
    g = tanh(add(matvec(p.w_g, z), p.b_g))
    c = add(mul(f, c_prev), mul(i, g))
    h = mul(o, tanh(c))
    return h, c


def run_lstm(xs: Sequence[Tensor], p: LstmParams, reverse: bool = False) -> list[Tensor]:
    """Hidden states for every position, returned in input order."""
    if len(xs) == 0:
        raise ValueError("run_lstm: empty input sequence")
    h = constant(np.zeros(p.hidden_size))
    c = constant(np.zeros(p.hidden_size))
    states = []
    for x in (reversed(xs) if reverse else xs):
        h, c = lstm_cell_step(x, h, c, p)
        states.append(h)
    if reverse:
        states.reverse()
    return states


def bilstm_layer(xs: Sequence[Tensor], fwd: LstmParams, bwd: LstmParams) -> list[Tensor]:
    """Per-position concatenation [forward_h_t ; backward_h_t]; dim 2*hidden."""
    if len(xs) == 0:
        raise ValueError("bilstm_layer: empty input sequence")
    f = run_lstm(xs, fwd)
    b = run_lstm(xs, bwd, reverse=True)
    return [concat([fh, bh]) for fh, bh in zip(f, b)]


def bilstm_final(xs: Sequence[Tensor], fwd: LstmParams, bwd: LstmParams) -> Tensor:
    """Concatenated final states of both directions (sequence encoder)."""
    if len(xs) == 0:
        raise ValueError("bilstm_final: empty input sequence")
    f = run_lstm(xs, fwd)
    b = run_lstm(xs, bwd, reverse=True)
    return concat([f[-1], b[0]])
