"""Hot numeric kernels with a numba lane and a pure-numpy fallback lane.

The jitted lane is used when numba imports successfully unless the
environment variable DISTRACTGEN_NUMBA is set to 0/false/off.  Both lanes
accumulate in ascending index order, one add per step, so they are
bit-identical to each other and to a naive loop reference.  That fixed
accumulation order is what makes training runs reproducible at the bit
level (BLAS-backed matmul and numpy's pairwise sums would not be).
"""

import os

import numpy as np

_flag = os.environ.get("DISTRACTGEN_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in ("0", "false", "off")

if NUMBA_REQUESTED:
    try:
        from numba import njit

        NUMBA_ACTIVE = True
    except ImportError:
        NUMBA_ACTIVE = False
else:
    NUMBA_ACTIVE = False


def matmul_numpy(a, b):
    """C = A @ B accumulated sequentially over the inner dimension.

    Each pass adds one outer product, so element (i, j) sees the adds
    a[i,0]*b[0,j], a[i,1]*b[1,j], ... in that exact order -- the same
    per-element sequence as the jitted triple loop.
    """
    m, k = a.shape
    n = b.shape[1]
    out = np.zeros((m, n), dtype=a.dtype)
    for t in range(k):
        out += a[:, t : t + 1] * b[t : t + 1, :]
    return out


def sum_all_numpy(a):
    flat = a.reshape(-1)
    if flat.size == 0:
        return a.dtype.type(0)
    # add.accumulate is a strict left-to-right fold, unlike np.sum
    return np.add.accumulate(flat)[-1]


def sum_axis0_numpy(a):
    if a.shape[0] == 0:
        return np.zeros((1, a.shape[1]), dtype=a.dtype)
    return np.add.accumulate(a, axis=0)[-1:, :].copy()


def sum_axis1_numpy(a):
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 1), dtype=a.dtype)
    return np.add.accumulate(a, axis=1)[:, -1:].copy()


if NUMBA_ACTIVE:

    @njit(cache=True)
    def matmul_numba(a, b):
        m, k = a.shape
        n = b.shape[1]
        out = np.zeros((m, n), dtype=a.dtype)
        for i in range(m):
            for t in range(k):
                a_it = a[i, t]
                for j in range(n):
                    out[i, j] += a_it * b[t, j]
        return out

    # The sum kernels fold left-to-right starting from the first element,
    # mirroring np.add.accumulate exactly (including signed-zero behaviour).

    @njit(cache=True)
    def sum_all_numba(a):
        flat = a.reshape(a.size)
        total = flat[0]
        for i in range(1, flat.size):
            total += flat[i]
        return total

    @njit(cache=True)
    def sum_axis0_numba(a):
        m, n = a.shape
        out = a[0:1, :].copy()
        for i in range(1, m):
            for j in range(n):
                out[0, j] += a[i, j]
        return out

    @njit(cache=True)
    def sum_axis1_numba(a):
        m, n = a.shape
        out = a[:, 0:1].copy()
        for i in range(m):
            for j in range(1, n):
                out[i, 0] += a[i, j]
        return out

else:
    matmul_numba = None
    sum_all_numba = None
    sum_axis0_numba = None
    sum_axis1_numba = None


if NUMBA_ACTIVE:

    def matmul(a, b):
        return matmul_numba(np.ascontiguousarray(a), np.ascontiguousarray(b))

    def sum_all(a):
        if a.size == 0:
            return a.dtype.type(0)
        return sum_all_numba(np.ascontiguousarray(a))

    def sum_axis0(a):
        if a.shape[0] == 0:
            return np.zeros((1, a.shape[1]), dtype=a.dtype)
        return sum_axis0_numba(np.ascontiguousarray(a))

    def sum_axis1(a):
        if a.shape[1] == 0:
            return np.zeros((a.shape[0], 1), dtype=a.dtype)
        return sum_axis1_numba(np.ascontiguousarray(a))

else:
    matmul = matmul_numpy
    sum_all = sum_all_numpy
    sum_axis0 = sum_axis0_numpy
    sum_axis1 = sum_axis1_numpy


def active_lane():
    return "numba" if NUMBA_ACTIVE else "numpy"
