"""Negative log-likelihood, score, and Fisher information of channel residuals.

Parameters live in an unconstrained packed vector eta of length 3m+1:
(log delta1, log delta2, delta3) per mode, then log alpha0. delta3 is kept
linear (it is periodic, so it is wrapped modulo 1 rather than transformed).

The residual enters only through its sample covariance S = (1/M) sum r_k r_k*,
so evaluation cost is independent of the snapshot count. All covariance
derivatives are Toeplitz, which lets the score collapse to diagonal sums of a
single dense matrix; everything else is dense O(n^3) linear algebra.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from dmcest import kernels
from dmcest.errors import InvalidParam, NotPositiveDefinite, ShapeMismatch
from dmcest.model import (
    DmcModel,
    ModeParams,
    _toeplitz_from_lags,
    mode_covariance_lags,
)


@dataclass(frozen=True)
class SufficientStats:
    """Sample covariance of the snapshots plus their count."""

    sample_covariance: np.ndarray
    m_snapshots: int

    def __post_init__(self):
        s = np.ascontiguousarray(self.sample_covariance, dtype=np.complex128)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ShapeMismatch(f"sample covariance must be square, got {s.shape}")
        object.__setattr__(self, "sample_covariance", s)

    @property
    def n_f(self):
        return self.sample_covariance.shape[0]

    @classmethod
    def from_observation(cls, obs):
        s = obs.data @ obs.data.conj().T / obs.m_snapshots
        return cls(sample_covariance=s, m_snapshots=obs.m_snapshots)


def pack_eta(model):
    """Pack a DmcModel into the unconstrained eta vector."""
    eta = np.empty(3 * model.order + 1)
    for i, mode in enumerate(model.modes):
        eta[3 * i] = mode.log_delta1
        eta[3 * i + 1] = mode.log_delta2
        eta[3 * i + 2] = mode.delta3
    eta[-1] = np.log(model.alpha0)
    return eta


def unpack_eta(eta, n_f):
    """Unpack eta into a DmcModel, wrapping each delta3 into [0, 1)."""
    eta = np.asarray(eta, dtype=np.float64)
    if not np.all(np.isfinite(eta)):
        raise InvalidParam("eta contains non-finite entries")
    if eta.ndim != 1 or eta.size % 3 != 1:
        raise InvalidParam(f"eta must have length 3m+1, got {eta.shape}")
    m = (eta.size - 1) // 3
    modes = tuple(
        ModeParams(
            delta1=float(np.exp(eta[3 * i])),
            delta2=float(np.exp(eta[3 * i + 1])),
            delta3=float(eta[3 * i + 2] % 1.0),
        )
        for i in range(m)
    )
    return DmcModel(modes=modes, alpha0=float(np.exp(eta[-1])), n_f=n_f)


def n_modes(eta):
    return (len(eta) - 1) // 3


def _eta_mode_lags(eta, n_f):
    """Per-mode covariance first columns, in eta order (no canonical sort)."""
    m = n_modes(eta)
    cols = []
    for i in range(m):
        mode = ModeParams(
            delta1=float(np.exp(eta[3 * i])),
            delta2=float(np.exp(eta[3 * i + 1])),
            delta3=float(eta[3 * i + 2] % 1.0),
        )
        cols.append(mode_covariance_lags(mode, n_f))
    return cols


def covariance_lags_from_eta(eta, n_f):
    """First column of R(eta) = sum of mode covariances + alpha0 * I."""
    col = np.zeros(n_f, dtype=np.complex128)
    for mode_col in _eta_mode_lags(eta, n_f):
        col += mode_col
    col[0] += np.exp(eta[-1])
    return col


def deriv_lags(eta, n_f):
    """First columns of dR/d eta_a for every packed parameter, shape [P, n_f].

    Chain rule through the log reparametrization: d/d(log x) = x * d/dx.
    """
    m = n_modes(eta)
    lags = np.arange(n_f)
    out = np.zeros((3 * m + 1, n_f), dtype=np.complex128)
    for i, mode_col in enumerate(_eta_mode_lags(eta, n_f)):
        delta2 = np.exp(eta[3 * i + 1])
        out[3 * i] = mode_col
        out[3 * i + 1] = -delta2 / (delta2 + 2j * np.pi * lags) * mode_col
        out[3 * i + 2] = -2j * np.pi * lags * mode_col
    out[-1, 0] = np.exp(eta[-1])
    return out


def _factor(eta, n_f):
    r = _toeplitz_from_lags(covariance_lags_from_eta(eta, n_f))
    try:
        cho = scipy.linalg.cho_factor(r, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"R(eta) is not positive definite: {exc}") from exc
    return cho


def _pairwise_traces(x):
    """t[a, b] = tr(x_a @ x_b) for a stack of square matrices."""
    p, n, _ = x.shape
    flat = x.reshape(p, n * n)
    flat_t = np.ascontiguousarray(x.transpose(0, 2, 1)).reshape(p, n * n)
    return flat @ flat_t.T


def nll(stats, eta):
    """M * (log det R + tr(R^-1 S)), constants dropped."""
    cho = _factor(eta, stats.n_f)
    logdet = 2.0 * np.sum(np.log(np.real(np.diag(cho[0]))))
    solved = scipy.linalg.cho_solve(cho, stats.sample_covariance, check_finite=False)
    return stats.m_snapshots * (logdet + np.trace(solved).real)


def _inverse_from_factor(cho):
    c, lower = cho
    inv, info = lapack.zpotri(c, lower=lower)
    if info != 0:
        raise NotPositiveDefinite(f"zpotri failed with info={info}")
    # zpotri fills only one triangle; the other still holds cho_factor leftovers
    if lower:
        tri = np.tril(inv)
        return tri + np.tril(inv, -1).conj().T
    tri = np.triu(inv)
    return tri + np.triu(inv, 1).conj().T


def _score_from_parts(r_inv, w, derivs, m_snapshots):
    # tr(A T) for Hermitian A and Toeplitz T collapses to diagonal sums of A
    sums = kernels.upper_diag_sums(np.ascontiguousarray(r_inv - w))
    head = derivs[:, 0].real * sums[0].real
    tail = 2.0 * np.real(derivs[:, 1:] @ sums[1:])
    return m_snapshots * (head + tail)


def score(stats, eta):
    """Gradient of nll with respect to eta."""
    cho = _factor(eta, stats.n_f)
    r_inv = _inverse_from_factor(cho)
    w = r_inv @ stats.sample_covariance @ r_inv
    return _score_from_parts(r_inv, w, deriv_lags(eta, stats.n_f), stats.m_snapshots)


def fim(eta, n_f, m_snapshots):
    """Fisher information for zero-mean complex Gaussian data:
    F[a, b] = M * tr(R^-1 dR_a R^-1 dR_b).
    """
    cho = _factor(eta, n_f)
    r_inv = _inverse_from_factor(cho)
    derivs = deriv_lags(eta, n_f)
    x = np.stack([r_inv @ _toeplitz_from_lags(col) for col in derivs])
    f = _pairwise_traces(x).real
    f = 0.5 * (f + f.T)
    return m_snapshots * f


def score_and_fim(stats, eta):
    """Score and FIM sharing one factorization (used by the optimizer)."""
    cho = _factor(eta, stats.n_f)
    r_inv = _inverse_from_factor(cho)
    w = r_inv @ stats.sample_covariance @ r_inv
    derivs = deriv_lags(eta, stats.n_f)
    grad = _score_from_parts(r_inv, w, derivs, stats.m_snapshots)
    x = np.stack([r_inv @ _toeplitz_from_lags(col) for col in derivs])
    f = _pairwise_traces(x).real
    f = 0.5 * (f + f.T)
    return grad, stats.m_snapshots * f


def nll_linear(stats, model):
    """nll evaluated directly from a DmcModel (reparametrization cross-check)."""
    return nll(stats, pack_eta(model))
