"""Dense-tensor reverse-mode autodiff core.

Small closure-based engine: every op returns a Tensor that remembers its
parents and a backward thunk.  Values are numpy arrays (float64 by
default, float32 selectable), and every reduction runs in a fixed
sequential order via the kernels module so repeated runs are
bit-reproducible.  No implicit broadcasting anywhere: shape coercions go
through explicit ops (broadcast_cols, concat, slices).
"""

import numpy as np

from . import kernels


class DimensionError(ValueError):
    pass


class DegenerateMaskError(ValueError):
    pass


class GraphCycleError(RuntimeError):
    pass


class GradientStateError(RuntimeError):
    pass


_DTYPES = {"f64": np.float64, "f32": np.float32}
_default_dtype = np.float64
_grad_enabled = True


def set_default_dtype(name):
    """Select global precision: 'f64' (default) or 'f32'."""
    global _default_dtype
    if name not in _DTYPES:
        raise ValueError(f"unknown precision {name!r}, expected one of {sorted(_DTYPES)}")
    _default_dtype = _DTYPES[name]


def default_dtype():
    return _default_dtype


class no_grad:
    """Context manager that turns off graph recording (inference paths)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class Tensor:
    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward", "_back_done")

    def __init__(self, values, requires_grad=False):
        arr = np.asarray(values, dtype=_default_dtype)
        self.values = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None
        self._back_done = False

    @classmethod
    def _op(cls, values, parents):
        out = cls.__new__(cls)
        out.values = values
        out.grad = None
        rg = False
        if _grad_enabled:
            for p in parents:
                if p.requires_grad:
                    rg = True
                    break
        out.requires_grad = rg
        out._parents = parents if rg else ()
        out._backward = None
        out._back_done = False
        return out

    @classmethod
    def zeros(cls, shape, requires_grad=False):
        return cls(np.zeros(shape, dtype=_default_dtype), requires_grad=requires_grad)

    @property
    def shape(self):
        return self.values.shape

    @property
    def size(self):
        return self.values.size

    def item(self):
        return float(self.values.reshape(-1)[0])

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.array(g)  # copy: g may be shared or a view
        else:
            self.grad += g

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.values.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


class Parameter:
    """Named trainable tensor; names are unique within a model."""

    __slots__ = ("name", "tensor")

    def __init__(self, name, values):
        self.name = name
        self.tensor = Tensor(values, requires_grad=True)

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.tensor.shape})"


def _check_same_shape(a, b, opname):
    if a.values.shape != b.values.shape:
        raise DimensionError(
            f"{opname}: operand shapes differ: {a.values.shape} vs {b.values.shape}"
        )


# ---------------------------------------------------------------------------
# elementwise ops


def add(a, b):
    _check_same_shape(a, b, "add")
    out = Tensor._op(a.values + b.values, (a, b))
    if out.requires_grad:

        def _back(g):
            if a.requires_grad:
                a._accum(g)
            if b.requires_grad:
                b._accum(g)

        out._backward = _back
    return out


def sub(a, b):
    _check_same_shape(a, b, "sub")
    out = Tensor._op(a.values - b.values, (a, b))
    if out.requires_grad:

        def _back(g):
            if a.requires_grad:
                a._accum(g)
            if b.requires_grad:
                b._accum(-g)

        out._backward = _back
    return out


def mul(a, b):
    _check_same_shape(a, b, "mul")
    out = Tensor._op(a.values * b.values, (a, b))
    if out.requires_grad:

        def _back(g):
            if a.requires_grad:
                a._accum(g * b.values)
            if b.requires_grad:
                b._accum(g * a.values)

        out._backward = _back
    return out


def div(a, b):
    _check_same_shape(a, b, "div")
    out = Tensor._op(a.values / b.values, (a, b))
    if out.requires_grad:

        def _back(g):
            if a.requires_grad:
                a._accum(g / b.values)
            if b.requires_grad:
                b._accum(-g * a.values / (b.values * b.values))

        out._backward = _back
    return out


def scale(a, c):
    """Multiply by a python scalar constant."""
    c = a.values.dtype.type(c)
    out = Tensor._op(a.values * c, (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g * c)

        out._backward = _back
    return out


def smul(a, s):
    """Multiply tensor a by a single-element tensor s (graph scalar)."""
    if s.values.size != 1:
        raise DimensionError(f"smul: scale operand must be a scalar, got shape {s.values.shape}")
    sv = s.values.reshape(-1)[0]
    out = Tensor._op(a.values * sv, (a, s))
    if out.requires_grad:

        def _back(g):
            if a.requires_grad:
                a._accum(g * sv)
            if s.requires_grad:
                s._accum(np.full(s.values.shape, kernels.sum_all(g * a.values)))

        out._backward = _back
    return out


def tanh(a):
    vals = np.tanh(a.values)
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g * (1.0 - vals * vals))

        out._backward = _back
    return out


def sigmoid(a):
    # exp(-x) may overflow to inf for very negative x; 1/(1+inf) -> 0 is
    # exactly the right limit, so just silence the warning.
    with np.errstate(over="ignore"):
        vals = 1.0 / (1.0 + np.exp(-a.values))
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g * vals * (1.0 - vals))

        out._backward = _back
    return out


def exp(a):
    vals = np.exp(a.values)
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g * vals)

        out._backward = _back
    return out


def log(a):
    out = Tensor._op(np.log(a.values), (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g / a.values)

        out._backward = _back
    return out


def sqrt(a):
    vals = np.sqrt(a.values)
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g * 0.5 / vals)

        out._backward = _back
    return out


def clamp_min(a, floor):
    """max(a, floor) elementwise; gradient passes where a > floor."""
    floor = a.values.dtype.type(floor)
    vals = np.maximum(a.values, floor)
    out = Tensor._op(vals, (a,))
    if out.requires_grad:
        mask = a.values > floor

        def _back(g):
            a._accum(g * mask)

        out._backward = _back
    return out


def clamp(a, lo, hi):
    """Clip to [lo, hi]; gradient passes inside the closed interval."""
    vals = np.clip(a.values, lo, hi)
    out = Tensor._op(vals, (a,))
    if out.requires_grad:
        mask = (a.values >= lo) & (a.values <= hi)

        def _back(g):
            a._accum(g * mask)

        out._backward = _back
    return out


# ---------------------------------------------------------------------------
# structural ops


def matmul(a, b):
    av, bv = a.values, b.values
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise DimensionError(f"matmul: incompatible shapes {av.shape} x {bv.shape}")
    out = Tensor._op(kernels.matmul(av, bv), (a, b))
    if out.requires_grad:

        def _back(g):
            if a.requires_grad:
                a._accum(kernels.matmul(g, bv.T))
            if b.requires_grad:
                b._accum(kernels.matmul(av.T, g))

        out._backward = _back
    return out


def transpose(a):
    if a.values.ndim != 2:
        raise DimensionError(f"transpose: expected rank 2, got shape {a.values.shape}")
    out = Tensor._op(np.ascontiguousarray(a.values.T), (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(g.T)

        out._backward = _back
    return out


def concat(tensors, axis):
    tensors = list(tensors)
    if not tensors:
        raise DimensionError("concat: need at least one tensor")
    base = list(tensors[0].values.shape)
    for t in tensors[1:]:
        s = list(t.values.shape)
        s[axis] = base[axis]
        if s != base:
            raise DimensionError(
                f"concat: non-concat axes differ: {tensors[0].values.shape} vs {t.values.shape}"
            )
    vals = np.concatenate([t.values for t in tensors], axis=axis)
    out = Tensor._op(vals, tuple(tensors))
    if out.requires_grad:
        offsets = np.cumsum([0] + [t.values.shape[axis] for t in tensors])

        def _back(g):
            for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
                if t.requires_grad:
                    idx = [slice(None)] * g.ndim
                    idx[axis] = slice(lo, hi)
                    t._accum(g[tuple(idx)])

        out._backward = _back
    return out


def slice_rows(a, start, stop):
    out = Tensor._op(a.values[start:stop].copy(), (a,))
    if out.requires_grad:

        def _back(g):
            if a.grad is None:
                a.grad = np.zeros_like(a.values)
            a.grad[start:stop] += g

        out._backward = _back
    return out


def slice_cols(a, start, stop):
    if a.values.ndim != 2:
        raise DimensionError(f"slice_cols: expected rank 2, got shape {a.values.shape}")
    out = Tensor._op(a.values[:, start:stop].copy(), (a,))
    if out.requires_grad:

        def _back(g):
            if a.grad is None:
                a.grad = np.zeros_like(a.values)
            a.grad[:, start:stop] += g

        out._backward = _back
    return out


def broadcast_cols(col, n):
    """Tile a column vector (d, 1) to (d, n); the one explicit broadcast."""
    if col.values.ndim != 2 or col.values.shape[1] != 1:
        raise DimensionError(f"broadcast_cols: expected (d, 1), got {col.values.shape}")
    out = Tensor._op(np.repeat(col.values, n, axis=1), (col,))
    if out.requires_grad:

        def _back(g):
            col._accum(kernels.sum_axis1(g))

        out._backward = _back
    return out


def sum_all(a):
    """Sequential-order sum of all entries, returned as a (1, 1) tensor."""
    vals = np.array([[kernels.sum_all(a.values)]], dtype=a.values.dtype)
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            a._accum(np.full_like(a.values, g.reshape(-1)[0]))

        out._backward = _back
    return out


def pick(a, row, col):
    """Select one entry of a rank-2 tensor as a (1, 1) tensor."""
    vals = a.values[row : row + 1, col : col + 1].copy()
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            if a.grad is None:
                a.grad = np.zeros_like(a.values)
            a.grad[row, col] += g[0, 0]

        out._backward = _back
    return out


def embedding_col(table, index):
    """Row `index` of an embedding table (V, d), returned as a (d, 1) column."""
    vals = np.ascontiguousarray(table.values[index].reshape(-1, 1))
    out = Tensor._op(vals, (table,))
    if out.requires_grad:

        def _back(g):
            if table.grad is None:
                table.grad = np.zeros_like(table.values)
            table.grad[index] += g[:, 0]

        out._backward = _back
    return out


# ---------------------------------------------------------------------------
# normalizers


def _axis_max(x, axis):
    return np.max(x, axis=axis, keepdims=True)


def _seq_sum_axis(x, axis):
    return kernels.sum_axis0(x) if axis == 0 else kernels.sum_axis1(x)


def softmax(a, axis, mask=None):
    """Numerically stabilized softmax along `axis` of a rank-2 tensor.

    mask, when given, is a boolean array of the same shape; masked (False)
    positions come out exactly 0 and take no probability mass.  A slice
    with no valid entry is an error.
    """
    x = a.values
    if x.ndim != 2 or axis not in (0, 1):
        raise DimensionError(f"softmax: expected rank 2 and axis 0/1, got {x.shape}, axis={axis}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != x.shape:
            raise DimensionError(f"softmax: mask shape {mask.shape} != tensor shape {x.shape}")
        counts = mask.sum(axis=axis)
        if np.any(counts == 0):
            raise DegenerateMaskError(f"softmax: fully masked slice along axis {axis}")
        shifted = np.where(mask, x, -np.inf)
        e = np.exp(shifted - _axis_max(shifted, axis))
        e = np.where(mask, e, 0.0)
    else:
        e = np.exp(x - _axis_max(x, axis))
    denom = _seq_sum_axis(e, axis)
    vals = e / denom
    out = Tensor._op(vals, (a,))
    if out.requires_grad:

        def _back(g):
            inner = _seq_sum_axis(g * vals, axis)
            a._accum(vals * (g - inner))

        out._backward = _back
    return out


def log_softmax(a, axis=0):
    """log(softmax(a)) along `axis`; finite for every entry."""
    x = a.values
    if x.ndim != 2 or axis not in (0, 1):
        raise DimensionError(
            f"log_softmax: expected rank 2 and axis 0/1, got {x.shape}, axis={axis}"
        )
    shifted = x - _axis_max(x, axis)
    lse = np.log(_seq_sum_axis(np.exp(shifted), axis))
    vals = shifted - lse
    out = Tensor._op(vals, (a,))
    if out.requires_grad:
        probs = np.exp(vals)

        def _back(g):
            inner = _seq_sum_axis(g, axis)
            a._accum(g - probs * inner)

        out._backward = _back
    return out


# ---------------------------------------------------------------------------
# backward pass


def _topo_order(root):
    """Reverse-postorder over the graph; raises on cycles."""
    order = []
    state = {}  # id -> 1 in progress, 2 done
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        nid = id(node)
        if expanded:
            state[nid] = 2
            order.append(node)
            continue
        st = state.get(nid, 0)
        if st == 2:
            continue
        if st == 1:
            raise GraphCycleError("cycle detected in computation graph")
        state[nid] = 1
        stack.append((node, True))
        for p in node._parents:
            if state.get(id(p), 0) != 2:
                stack.append((p, False))
    return order


def backward(loss):
    """Accumulate d(loss)/d(node) into .grad over the whole graph.

    loss must be a single-element tensor.  Calling backward twice on the
    same graph would silently double-count, so it raises instead.
    """
    if loss.values.size != 1:
        raise DimensionError(f"backward: loss must be scalar, got shape {loss.values.shape}")
    if loss._back_done:
        raise GradientStateError(
            "backward already ran on this graph; zero gradients and rebuild before rerunning"
        )
    loss._back_done = True
    order = _topo_order(loss)
    loss._accum(np.ones_like(loss.values))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
