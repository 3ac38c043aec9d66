"""Dense linear algebra helpers used by the solver loops.

Matrices are plain 2-D float64 ndarrays kept in column-major (Fortran)
order so that column slices are contiguous; vectors are 1-D float64
ndarrays.  The residual r = x - D @ alpha is maintained incrementally
across coordinate updates and refreshed by full recomputation at
well-defined points to bound drift.
"""

import numpy as np


def as_matrix(a):
    """Validate and return `a` as a column-major float64 matrix."""
    m = np.asfortranarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def as_vector(a):
    """Validate and return `a` as a 1-D float64 vector."""
    v = np.asarray(a, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


def matvec(m, v):
    """Return m @ v, checking the inner dimension."""
    if v.shape[0] != m.shape[1]:
        raise ValueError(f"dimension mismatch: matrix is {m.shape}, vector has length {v.shape[0]}")
    return m @ v


def column_dot(m, j, v):
    """Inner product of column j of `m` with `v`."""
    if not 0 <= j < m.shape[1]:
        raise IndexError(f"column index {j} out of range for {m.shape[1]} columns")
    if v.shape[0] != m.shape[0]:
        raise ValueError(f"dimension mismatch: matrix has {m.shape[0]} rows, vector has length {v.shape[0]}")
    return float(m[:, j] @ v)


def residual_coordinate_update(r, m, j, old, new):
    """Update the maintained residual in place for alpha_j: old -> new.

    Keeps r = x - m @ alpha valid after the coordinate change,
    costing O(rows) instead of a full O(rows * cols) recomputation.
    """
    if not 0 <= j < m.shape[1]:
        raise IndexError(f"column index {j} out of range for {m.shape[1]} columns")
    if new != old:
        r -= m[:, j] * (new - old)
    return r


def refresh_residual(x, m, alpha):
    """Recompute r = x - m @ alpha from scratch (exploits sparsity of alpha)."""
    support = np.flatnonzero(alpha)
    if support.size == 0:
        return x.copy()
    return x - m[:, support] @ alpha[support]
