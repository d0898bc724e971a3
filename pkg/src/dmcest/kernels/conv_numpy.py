"""Circular 1D convolution primitives, im2col + BLAS implementation.

Layout is channels-last: activations are [batch, length, channels], weights
are [kernel, c_in, c_out]. Padding is circular with p = (kernel - 1) // 2, so
a gather over length L emits L // stride samples and a scatter over length L
emits L * stride samples. Three primitives cover conv/transposed-conv forward
and backward:

    gather_mix   y[b,i,o] = sum_{k,c} x[b, (i*s + k - p) mod L, c] * w[k,c,o]
    scatter_mix  y[b, (i*s + k - p) mod Lo, o] += sum_c x[b,i,c] * w[k,c,o]
    weight_corr  dw[k,c,o] = sum_{b,i} x[b, (i*s + k - p) mod L, c] * dy[b,i,o]
"""

import numpy as np


def _pad_circular(x, p):
    b, length, c = x.shape
    xp = np.empty((b, length + 2 * p, c), dtype=x.dtype)
    xp[:, p:p + length] = x
    xp[:, :p] = x[:, length - p:]
    xp[:, p + length:] = x[:, :p]
    return xp


def _cols(x, kernel, stride):
    b, length, c = x.shape
    p = (kernel - 1) // 2
    lo = length // stride
    xp = _pad_circular(x, p)
    cols = np.empty((b, lo, kernel, c), dtype=x.dtype)
    for k in range(kernel):
        cols[:, :, k, :] = xp[:, k:k + stride * lo:stride, :]
    return cols.reshape(b * lo, kernel * c)


def gather_mix(x, w, stride):
    b, length, _ = x.shape
    kernel, c_in, c_out = w.shape
    lo = length // stride
    out = _cols(x, kernel, stride) @ w.reshape(kernel * c_in, c_out)
    return out.reshape(b, lo, c_out)


def scatter_mix(x, w, stride):
    b, li, c_in = x.shape
    kernel, _, c_out = w.shape
    p = (kernel - 1) // 2
    lo = li * stride
    mixed = x.reshape(b * li, c_in) @ np.ascontiguousarray(
        w.transpose(1, 0, 2)).reshape(c_in, kernel * c_out)
    mixed = mixed.reshape(b, li, kernel, c_out)
    out_pad = np.zeros((b, lo + 2 * p, c_out), dtype=x.dtype)
    for k in range(kernel):
        out_pad[:, k:k + stride * li:stride, :] += mixed[:, :, k, :]
    out = out_pad[:, p:p + lo]
    if p:
        out[:, lo - p:] += out_pad[:, :p]
        out[:, :p] += out_pad[:, p + lo:]
    return np.ascontiguousarray(out)


def weight_corr(x, dout, stride, kernel):
    b, lo, c_out = dout.shape
    c_in = x.shape[2]
    cols = _cols(x, kernel, stride)
    dw = cols.T @ dout.reshape(b * lo, c_out)
    return dw.reshape(kernel, c_in, c_out)
