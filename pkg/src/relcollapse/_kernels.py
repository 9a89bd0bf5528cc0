"""Matrix-free application of a local operator to a dense amplitude vector.

Two interchangeable implementations: a numba ``@njit`` index-arithmetic loop
and a pure numpy ``tensordot`` path.  Set ``RELCOLLAPSE_NUMBA=0`` to force the
numpy path; it is also used automatically when numba cannot be imported.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("RELCOLLAPSE_NUMBA", "1") != "0"


def row_major_strides(dims):
    strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    return strides


def apply_matrix_numpy(amps, dims, targets, mat):
    """Apply ``mat`` on the ``targets`` axes of ``amps`` viewed with shape ``dims``."""
    dims = tuple(int(d) for d in dims)
    targets = [int(t) for t in targets]
    k = len(targets)
    psi = amps.reshape(dims)
    op = mat.reshape(tuple(dims[t] for t in targets) * 2)
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return np.ascontiguousarray(out).reshape(-1)


def _apply_matrix_loop(amps, dims, targets, mat):
    n_axes = dims.shape[0]
    k = targets.shape[0]
    strides = np.ones(n_axes, dtype=np.int64)
    for j in range(n_axes - 2, -1, -1):
        strides[j] = strides[j + 1] * dims[j + 1]
    d = mat.shape[0]
    # offset of each local (target) index inside the full vector
    offs = np.zeros(d, dtype=np.int64)
    for loc in range(d):
        rem = loc
        off = 0
        for j in range(k - 1, -1, -1):
            dj = dims[targets[j]]
            off += (rem % dj) * strides[targets[j]]
            rem //= dj
        offs[loc] = off
    is_target = np.zeros(n_axes, dtype=np.bool_)
    for j in range(k):
        is_target[targets[j]] = True
    rest = np.empty(n_axes - k, dtype=np.int64)
    r = 0
    for j in range(n_axes):
        if not is_target[j]:
            rest[r] = j
            r += 1
    n_bases = amps.shape[0] // d
    counter = np.zeros(n_axes - k, dtype=np.int64)
    block = np.empty(d, dtype=np.complex128)
    out = np.empty(amps.shape[0], dtype=np.complex128)
    base = 0
    for _ in range(n_bases):
        for c in range(d):
            block[c] = amps[base + offs[c]]
        for row in range(d):
            acc = 0j
            for c in range(d):
                acc += mat[row, c] * block[c]
            out[base + offs[row]] = acc
        # mixed-radix increment over the non-target axes, last axis fastest
        j = n_axes - k - 1
        while j >= 0:
            ax = rest[j]
            counter[j] += 1
            base += strides[ax]
            if counter[j] < dims[ax]:
                break
            base -= counter[j] * strides[ax]
            counter[j] = 0
            j -= 1
    return out


if HAVE_NUMBA:
    _apply_matrix_jit = njit(cache=True)(_apply_matrix_loop)
else:  # pragma: no cover
    _apply_matrix_jit = _apply_matrix_loop


def apply_matrix_numba(amps, dims, targets, mat):
    return _apply_matrix_jit(
        np.ascontiguousarray(amps, dtype=np.complex128),
        np.asarray(dims, dtype=np.int64),
        np.asarray(targets, dtype=np.int64),
        np.ascontiguousarray(mat, dtype=np.complex128),
    )


def apply_matrix(amps, dims, targets, mat):
    if USE_NUMBA:
        return apply_matrix_numba(amps, dims, targets, mat)
    return apply_matrix_numpy(amps, dims, targets, mat)
