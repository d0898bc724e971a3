"""Cholesky factorization of Hermitian positive-definite Toeplitz matrices.

Generalized Schur recursion on the displacement generators, O(n^2) instead of
the O(n^3) dense factorization. The result is the (unique) lower Cholesky
factor, so it matches LAPACK up to rounding.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def upper_diag_sums(w):
    """sums[l] = sum_i w[i, i+l] over the upper diagonals of a square matrix."""
    n = w.shape[0]
    out = np.zeros(n, dtype=w.dtype)
    for i in range(n):
        row = w[i]
        for l in range(n - i):
            out[l] += row[i + l]
    return out


@njit(cache=True)
def toeplitz_cholesky_raw(first_col):
    """Lower Cholesky factor of the Toeplitz matrix with this first column.

    Returns (L, ok). ok is False when the matrix is not numerically positive
    definite; L is then only partially filled and must be discarded.
    """
    n = first_col.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    t0 = first_col[0].real
    if t0 <= 0.0 or n == 0:
        return L, False
    s = 1.0 / np.sqrt(t0)
    g = first_col * s
    h = g.copy()
    h[0] = 0.0
    L[:, 0] = g
    for k in range(1, n):
        for i in range(n - 1, k - 1, -1):
            g[i] = g[i - 1]
        g[k - 1] = 0.0
        rho = h[k] / g[k]
        mag = np.abs(rho)
        if not np.isfinite(mag) or mag >= 1.0:
            return L, False
        inv = 1.0 / np.sqrt(1.0 - mag * mag)
        rc = np.conj(rho)
        for i in range(k, n):
            gi = g[i]
            hi = h[i]
            g[i] = (gi - rc * hi) * inv
            h[i] = (hi - rho * gi) * inv
        L[k:, k] = g[k:]
    return L, True
