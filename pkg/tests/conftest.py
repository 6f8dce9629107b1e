import numpy as np
import pytest

from distractgen import tensor as T


@pytest.fixture(autouse=True)
def f64_mode():
    T.set_default_dtype("f64")
    yield
    T.set_default_dtype("f64")


def ref_lstm_cell(x, h, c, w_in, w_rec, bias):
    """Scalar reference LSTM step, unit by unit, independent of the graph."""
    import math

    hd = len(h)
    gates = []
    for row in range(4 * hd):
        acc = bias[row]
        for j in range(len(x)):
            acc += w_in[row][j] * x[j]
        for j in range(hd):
            acc += w_rec[row][j] * h[j]
        gates.append(acc)

    def sig(v):
        return 1.0 / (1.0 + math.exp(-v))

    h_new, c_new = [], []
    for d in range(hd):
        gate_in = sig(gates[d])
        gate_forget = sig(gates[hd + d])
        gate_cell = math.tanh(gates[2 * hd + d])
        gate_out = sig(gates[3 * hd + d])
        cn = gate_forget * c[d] + gate_in * gate_cell
        c_new.append(cn)
        h_new.append(gate_out * math.tanh(cn))
    return h_new, c_new


def ref_bilstm(inputs, fwd, bwd):
    """Reference bidirectional pass over a list of input vectors.

    fwd/bwd are (w_in, w_rec, bias) triples as nested lists; returns
    (list of concatenated states, summary vector).
    """
    hd = len(fwd[2]) // 4

    def run(seq, weights):
        w_in, w_rec, bias = weights
        h = [0.0] * hd
        c = [0.0] * hd
        states = []
        for x in seq:
            h, c = ref_lstm_cell(x, h, c, w_in, w_rec, bias)
            states.append(h)
        return states, h

    f_states, f_final = run(inputs, fwd)
    b_states, b_final = run(list(reversed(inputs)), bwd)
    b_states.reverse()
    states = [f + b for f, b in zip(f_states, b_states)]
    return states, f_final + b_final


def lstm_weight_lists(weights):
    """Pull (w_in, w_rec, bias) out of a model LSTM weight dict as lists."""
    return (
        weights["w_in"].values.tolist(),
        weights["w_rec"].values.tolist(),
        weights["bias"].values[:, 0].tolist(),
    )


def rand_tensor(rng, shape, requires_grad=False, scale=1.0):
    return T.Tensor(scale * rng.standard_normal(shape), requires_grad=requires_grad)
