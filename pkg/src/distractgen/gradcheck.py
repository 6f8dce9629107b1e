"""Finite-difference verification of the reverse-mode gradients."""

import math

import numpy as np

from .tensor import backward


def grad_check(f, params, eps=1e-5, max_coords_per_param=None, rng=None):
    """Compare backward() gradients of f against central differences.

    f is a deterministic zero-argument callable that rebuilds its graph
    from the current parameter values and returns a scalar Tensor.  For
    every checked coordinate the numeric estimate is
    (f(p + eps*e) - f(p - eps*e)) / (2*eps) and the reported figure is
    max over coordinates of |a - n| / max(|a|, |n|, 1e-8).

    max_coords_per_param limits the per-parameter coordinate count
    (seeded subsample); None checks every coordinate.  Requires 64-bit
    mode to be meaningful.
    """
    params = list(params)
    if not (1e-7 <= eps <= 1e-3):
        raise ValueError(f"eps {eps} outside [1e-7, 1e-3]")
    if max_coords_per_param is not None and rng is None:
        rng = np.random.default_rng(0)

    for p in params:
        p.tensor.zero_grad()
    loss = f()
    base = loss.item()
    if not math.isfinite(base):
        raise FloatingPointError(f"non-finite loss value {base}")
    backward(loss)
    analytic = {
        p.name: (p.tensor.grad.copy() if p.tensor.grad is not None else np.zeros_like(p.tensor.values))
        for p in params
    }

    max_rel = 0.0
    for p in params:
        vals = p.tensor.values
        flat = vals.reshape(-1)
        n_coords = flat.size
        if max_coords_per_param is not None and n_coords > max_coords_per_param:
            coords = np.sort(rng.choice(n_coords, size=max_coords_per_param, replace=False))
        else:
            coords = range(n_coords)
        a_flat = analytic[p.name].reshape(-1)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + eps
            f_plus = f().item()
            flat[idx] = orig - eps
            f_minus = f().item()
            flat[idx] = orig
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise FloatingPointError(f"non-finite loss while perturbing {p.name}[{idx}]")
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = a_flat[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if rel > max_rel:
                max_rel = rel
    return max_rel


def grad_check_directional(f, params, eps=1e-5, n_directions=8, seed=0):
    """Directional-derivative check of the composed graph.

    Per-coordinate differences drown in float64 truncation noise wherever
    a deep path leaves a gradient below ~1e-6, so the whole-graph test
    compares g.v against (f(p + eps*v) - f(p - eps*v)) / (2*eps) for
    random unit directions v spanning all parameters; the projection is
    dominated by the meaningful gradient mass.  Returns the max relative
    error over directions.
    """
    params = list(params)
    rng = np.random.default_rng(seed)
    for p in params:
        p.tensor.zero_grad()
    loss = f()
    if not math.isfinite(loss.item()):
        raise FloatingPointError(f"non-finite loss value {loss.item()}")
    backward(loss)
    grads = [
        (p.tensor.grad.copy() if p.tensor.grad is not None else np.zeros_like(p.tensor.values))
        for p in params
    ]
    originals = [p.tensor.values for p in params]
    max_rel = 0.0
    for _ in range(n_directions):
        direction = [rng.standard_normal(p.tensor.values.shape) for p in params]
        norm = math.sqrt(sum(float(np.sum(d * d)) for d in direction))
        direction = [d / norm for d in direction]
        analytic = sum(float(np.sum(g * d)) for g, d in zip(grads, direction))
        for p, orig, d in zip(params, originals, direction):
            p.tensor.values = orig + eps * d
        f_plus = f().item()
        for p, orig, d in zip(params, originals, direction):
            p.tensor.values = orig - eps * d
        f_minus = f().item()
        for p, orig in zip(params, originals):
            p.tensor.values = orig
        numeric = (f_plus - f_minus) / (2.0 * eps)
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        max_rel = max(max_rel, rel)
    return max_rel
