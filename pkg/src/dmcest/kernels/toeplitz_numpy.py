"""Pure numpy fallback for the Toeplitz Cholesky kernel (dense LAPACK)."""

import numpy as np
import scipy.linalg


def upper_diag_sums(w):
    """sums[l] = sum_i w[i, i+l] over the upper diagonals of a square matrix."""
    n = w.shape[0]
    flat = np.concatenate([w.ravel(), np.zeros(n, dtype=w.dtype)])
    rows = flat[: n * (n + 1)].reshape(n, n + 1)[:, :n]
    # rows[i, l] = w[i, i+l] while i+l < n, leftovers from the next row after
    mask = (np.arange(n)[:, None] + np.arange(n)[None, :]) < n
    return np.sum(np.where(mask, rows, 0.0), axis=0)


def toeplitz_cholesky_raw(first_col):
    """Lower Cholesky factor via dense expansion; returns (L, ok)."""
    first_col = np.asarray(first_col, dtype=np.complex128)
    n = first_col.shape[0]
    if n == 0 or first_col[0].real <= 0.0:
        return np.zeros((n, n), dtype=np.complex128), False
    full = scipy.linalg.toeplitz(first_col, first_col.conj())
    try:
        L = np.linalg.cholesky(full)
    except np.linalg.LinAlgError:
        return np.zeros((n, n), dtype=np.complex128), False
    return L, True
