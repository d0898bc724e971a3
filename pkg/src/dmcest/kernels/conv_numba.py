"""Circular 1D convolution primitives, numba direct-loop implementation.

Same contracts and layout as dmcest.kernels.conv_numpy. Parallelism is over
the batch (gather/scatter) or the kernel taps (weight_corr), so no thread
ever reduces into another thread's output and results are deterministic.
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True, fastmath=True, cache=True)
def gather_mix(x, w, stride):
    b, length, _ = x.shape
    kernel, c_in, c_out = w.shape
    p = (kernel - 1) // 2
    lo = length // stride
    out = np.zeros((b, lo, c_out), dtype=x.dtype)
    for bi in prange(b):
        for i in range(lo):
            acc = out[bi, i]
            base = i * stride - p
            for k in range(kernel):
                j = base + k
                if j < 0:
                    j += length
                elif j >= length:
                    j -= length
                xr = x[bi, j]
                wk = w[k]
                for c in range(c_in):
                    v = xr[c]
                    wr = wk[c]
                    for o in range(c_out):
                        acc[o] += v * wr[o]
    return out


@njit(parallel=True, fastmath=True, cache=True)
def scatter_mix(x, w, stride):
    b, li, c_in = x.shape
    kernel, _, c_out = w.shape
    p = (kernel - 1) // 2
    lo = li * stride
    out = np.zeros((b, lo, c_out), dtype=x.dtype)
    for bi in prange(b):
        for i in range(li):
            xr = x[bi, i]
            base = i * stride - p
            for k in range(kernel):
                j = base + k
                if j < 0:
                    j += lo
                elif j >= lo:
                    j -= lo
                orow = out[bi, j]
                wk = w[k]
                for c in range(c_in):
                    v = xr[c]
                    wr = wk[c]
                    for o in range(c_out):
                        orow[o] += v * wr[o]
    return out


@njit(parallel=True, fastmath=True, cache=True)
def weight_corr(x, dout, stride, kernel):
    b, lo, c_out = dout.shape
    length = x.shape[1]
    c_in = x.shape[2]
    p = (kernel - 1) // 2
    dw = np.zeros((kernel, c_in, c_out), dtype=x.dtype)
    for k in prange(kernel):
        dwk = dw[k]
        for bi in range(b):
            for i in range(lo):
                j = i * stride + k - p
                if j < 0:
                    j += length
                elif j >= length:
                    j -= length
                xr = x[bi, j]
                dr = dout[bi, i]
                for c in range(c_in):
                    v = xr[c]
                    row = dwk[c]
                    for o in range(c_out):
                        row[o] += v * dr[o]
    return dw
