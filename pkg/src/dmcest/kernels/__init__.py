"""Hot numeric kernels with selectable backends.

Two implementations exist for every kernel: a numba ``@njit`` one and a pure
numpy one (im2col + BLAS for the convolution primitives, LAPACK for the
Toeplitz factorization). The env var ``DMC_BACKEND`` picks the path:

    DMC_BACKEND=numba   force numba everywhere (falls back with a warning if
                        numba is unavailable)
    DMC_BACKEND=numpy   force pure numpy everywhere
    DMC_BACKEND=auto    per-kernel default (the shipped benchmark informs the
                        choice: numba for the Toeplitz Cholesky recursion,
                        BLAS-backed numpy for the convolution primitives)

``benchmarks/bench_kernels.py`` compares both paths on realistic shapes.
"""

import os
import warnings

from dmcest.kernels import conv_numpy, toeplitz_numpy

try:
    from dmcest.kernels import conv_numba, toeplitz_numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    conv_numba = None
    toeplitz_numba = None
    HAVE_NUMBA = False

_KERNELS = (
    "toeplitz_cholesky_raw",
    "upper_diag_sums",
    "gather_mix",
    "scatter_mix",
    "weight_corr",
)
_active = {}
_backend_name = "unset"


def _resolve(name):
    if name == "auto":
        if HAVE_NUMBA:
            return {
                "toeplitz_cholesky_raw": toeplitz_numba.toeplitz_cholesky_raw,
                "upper_diag_sums": toeplitz_numba.upper_diag_sums,
                "gather_mix": conv_numpy.gather_mix,
                "scatter_mix": conv_numpy.scatter_mix,
                "weight_corr": conv_numpy.weight_corr,
            }
        name = "numpy"
    if name == "numba":
        if not HAVE_NUMBA:
            warnings.warn("numba unavailable, using numpy kernels")
            name = "numpy"
        else:
            return {
                "toeplitz_cholesky_raw": toeplitz_numba.toeplitz_cholesky_raw,
                "upper_diag_sums": toeplitz_numba.upper_diag_sums,
                "gather_mix": conv_numba.gather_mix,
                "scatter_mix": conv_numba.scatter_mix,
                "weight_corr": conv_numba.weight_corr,
            }
    if name == "numpy":
        return {
            "toeplitz_cholesky_raw": toeplitz_numpy.toeplitz_cholesky_raw,
            "upper_diag_sums": toeplitz_numpy.upper_diag_sums,
            "gather_mix": conv_numpy.gather_mix,
            "scatter_mix": conv_numpy.scatter_mix,
            "weight_corr": conv_numpy.weight_corr,
        }
    raise ValueError(f"unknown DMC_BACKEND {name!r} (use auto|numba|numpy)")


def set_backend(name):
    """Select the kernel backend; returns the previous backend name."""
    global _backend_name
    table = _resolve(name)
    prev = _backend_name
    _active.update(table)
    _backend_name = name
    return prev


def backend_name():
    return _backend_name


set_backend(os.environ.get("DMC_BACKEND", "auto"))


def toeplitz_cholesky_raw(first_col):
    return _active["toeplitz_cholesky_raw"](first_col)


def upper_diag_sums(w):
    return _active["upper_diag_sums"](w)


def gather_mix(x, w, stride):
    return _active["gather_mix"](x, w, stride)


def scatter_mix(x, w, stride):
    return _active["scatter_mix"](x, w, stride)


def weight_corr(x, dout, stride, kernel):
    return _active["weight_corr"](x, dout, stride, kernel)
