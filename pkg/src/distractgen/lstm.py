"""LSTM cells and sequence runners on the autodiff core.

Gate slicing convention is fixed as (input, forget, cell, output); the
forget-gate bias slice starts at 1.0.  All states are (H, 1) column
tensors.
"""

from . import tensor as T


def init_lstm_params(registry, prefix, input_dim, hidden_dim, rng, forget_bias=1.0):
    """Register w_in (4H x D), w_rec (4H x H), bias (4H x 1) under prefix."""
    w_in = registry.add(f"{prefix}.w_in", rng.uniform(-0.1, 0.1, (4 * hidden_dim, input_dim)))
    w_rec = registry.add(f"{prefix}.w_rec", rng.uniform(-0.1, 0.1, (4 * hidden_dim, hidden_dim)))
    b = rng.uniform(-0.1, 0.1, (4 * hidden_dim, 1))
    b[hidden_dim : 2 * hidden_dim] = forget_bias
    bias = registry.add(f"{prefix}.bias", b)
    return {"w_in": w_in, "w_rec": w_rec, "bias": bias, "hidden": hidden_dim}


def lstm_cell(x, h, c, weights):
    """One LSTM step; returns (h_new, c_new)."""
    hd = weights["hidden"]
    gates = T.add(T.add(T.matmul(weights["w_in"], x), T.matmul(weights["w_rec"], h)), weights["bias"])
    gate_in = T.sigmoid(T.slice_rows(gates, 0, hd))
    gate_forget = T.sigmoid(T.slice_rows(gates, hd, 2 * hd))
    gate_cell = T.tanh(T.slice_rows(gates, 2 * hd, 3 * hd))
    gate_out = T.sigmoid(T.slice_rows(gates, 3 * hd, 4 * hd))
    c_new = T.add(T.mul(gate_forget, c), T.mul(gate_in, gate_cell))
    h_new = T.mul(gate_out, T.tanh(c_new))
    return h_new, c_new


def run_lstm(inputs, weights, reverse=False, state=None):
    """Run one direction over a list of (D, 1) inputs.

    Returns (states aligned to input order, final (h, c)).
    """
    hd = weights["hidden"]
    if state is None:
        h = T.Tensor.zeros((hd, 1))
        c = T.Tensor.zeros((hd, 1))
    else:
        h, c = state
    seq = list(reversed(inputs)) if reverse else inputs
    states = []
    for x in seq:
        h, c = lstm_cell(x, h, c, weights)
        states.append(h)
    if reverse:
        states.reverse()
    return states, (h, c)


def run_bilstm(inputs, fwd_weights, bwd_weights):
    """Bidirectional pass; per-position states are [forward; backward].

    The summary vector concatenates the forward final state (has seen the
    whole sequence left-to-right) with the backward final state (right-to-
    left), so both halves cover every token.
    """
    fwd_states, (fwd_h, _) = run_lstm(inputs, fwd_weights)
    bwd_states, (bwd_h, _) = run_lstm(inputs, bwd_weights, reverse=True)
    states = [T.concat([f, b], axis=0) for f, b in zip(fwd_states, bwd_states)]
    summary = T.concat([fwd_h, bwd_h], axis=0)
    return states, summary


def run_stacked_bilstm(inputs, layers):
    """Stack of bidirectional layers; returns top-layer states + summary."""
    states = inputs
    summary = None
    for fwd_weights, bwd_weights in layers:
        states, summary = run_bilstm(states, fwd_weights, bwd_weights)
    return states, summary
