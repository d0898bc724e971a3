"""Parametric covariance model of diffuse multipath, sampling, and PDP tools.

Conventions used throughout the package: frequency samples are the integer
bin indices 0..n_f-1, delays are normalized to [0, 1), and the inverse DFT is
unitary, so delay bin k corresponds to normalized delay k / n_f.

A single diffuse mode with parameters (delta1, delta2, delta3) has the
Hermitian Toeplitz covariance

    R[i, j] = delta1 / (delta2 + 2j*pi*(i-j)) * exp(-2j*pi*(i-j)*delta3)

which is the frequency-domain image of a one-sided exponential power-delay
profile of height delta1, decay rate delta2 and onset delta3. Multi-modal
covariances are sums of single-mode ones plus a white noise floor alpha0*I.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from dmcest import kernels
from dmcest.errors import (
    InvalidDim,
    InvalidParam,
    NonPositiveInput,
    NotPositiveDefinite,
    ShapeMismatch,
)

MAX_MODES = 3

LINEAR = "linear"
LOG_NORMALIZED = "log_normalized"


@dataclass(frozen=True)
class ModeParams:
    """One diffuse mode: power scale, decay rate, base delay."""

    delta1: float
    delta2: float
    delta3: float

    def __post_init__(self):
        d1, d2, d3 = self.delta1, self.delta2, self.delta3
        if not (np.isfinite(d1) and np.isfinite(d2) and np.isfinite(d3)):
            raise InvalidParam(f"non-finite mode params {(d1, d2, d3)}")
        if d1 <= 0 or d2 <= 0:
            raise InvalidParam(f"delta1 and delta2 must be > 0, got {(d1, d2)}")
        if not 0.0 <= d3 < 1.0:
            raise InvalidParam(f"delta3 must lie in [0, 1), got {d3}")

    @property
    def log_delta1(self):
        return math.log(self.delta1)

    @property
    def log_delta2(self):
        return math.log(self.delta2)


@dataclass(frozen=True)
class DmcModel:
    """Up to MAX_MODES diffuse modes plus a white noise floor.

    Modes are kept in canonical order: ascending delta3, ties broken by
    descending delta1.
    """

    modes: tuple
    alpha0: float
    n_f: int

    def __post_init__(self):
        if not np.isfinite(self.alpha0) or self.alpha0 <= 0:
            raise InvalidParam(f"alpha0 must be > 0, got {self.alpha0}")
        if int(self.n_f) != self.n_f or self.n_f < 2:
            raise InvalidDim(f"n_f must be an integer >= 2, got {self.n_f}")
        modes = tuple(self.modes)
        if len(modes) > MAX_MODES:
            raise InvalidParam(f"at most {MAX_MODES} modes supported, got {len(modes)}")
        modes = tuple(sorted(modes, key=lambda m: (m.delta3, -m.delta1)))
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "n_f", int(self.n_f))

    @property
    def order(self):
        return len(self.modes)

    def to_json_dict(self):
        return {
            "alpha0": self.alpha0,
            "modes": [
                {"delta1": m.delta1, "delta2": m.delta2, "delta3": m.delta3}
                for m in self.modes
            ],
            "n_f": self.n_f,
        }

    @classmethod
    def from_json_dict(cls, doc):
        modes = tuple(
            ModeParams(m["delta1"], m["delta2"], m["delta3"]) for m in doc["modes"]
        )
        return cls(modes=modes, alpha0=doc["alpha0"], n_f=doc["n_f"])

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class ChannelObservation:
    """Complex n_f x m_snapshots matrix; snapshots are the columns."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.size == 0:
            raise ShapeMismatch(f"observation must be a non-empty 2D array, got {data.shape}")
        object.__setattr__(self, "data", np.ascontiguousarray(data, dtype=np.complex128))

    @property
    def n_f(self):
        return self.data.shape[0]

    @property
    def m_snapshots(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class Pdp:
    """Power-delay profile, either linear power or log-normalized."""

    values: np.ndarray
    domain: str = LINEAR
    scale: float = None

    def __post_init__(self):
        if self.domain not in (LINEAR, LOG_NORMALIZED):
            raise InvalidParam(f"unknown PDP domain {self.domain!r}")
        object.__setattr__(
            self, "values", np.ascontiguousarray(self.values, dtype=np.float64)
        )

    @property
    def n_f(self):
        return self.values.shape[0]


def mode_covariance_lags(delta, n_f):
    """First covariance column of one mode: lag values l = 0 .. n_f-1."""
    lags = np.arange(n_f)
    phase = np.exp(-2j * np.pi * lags * delta.delta3)
    return delta.delta1 / (delta.delta2 + 2j * np.pi * lags) * phase


def covariance_lags(model):
    """First column of the full covariance (modes summed, alpha0 at lag 0)."""
    col = np.zeros(model.n_f, dtype=np.complex128)
    for mode in model.modes:
        col += mode_covariance_lags(mode, model.n_f)
    col[0] += model.alpha0
    return col


def _toeplitz_from_lags(col):
    # first column col, first row conj(col): exact Hermitian pairs by construction
    return scipy.linalg.toeplitz(col, col.conj())


def build_mode_covariance(delta, n_f):
    """Hermitian Toeplitz covariance of a single mode."""
    if not isinstance(delta, ModeParams):
        delta = ModeParams(*delta)
    if int(n_f) != n_f or n_f < 2:
        raise InvalidDim(f"n_f must be an integer >= 2, got {n_f}")
    return _toeplitz_from_lags(mode_covariance_lags(delta, int(n_f)))


def cholesky_lags(col, jitter=True):
    """Cholesky factor of the Toeplitz matrix with first column `col`.

    On numerical failure and with `jitter` enabled, retries once with the
    diagonal inflated by 1e-10 * trace/n (rounding tolerance, not a repair of
    genuinely indefinite input).
    """
    col = np.ascontiguousarray(col, dtype=np.complex128)
    L, ok = kernels.toeplitz_cholesky_raw(col)
    if ok:
        return L
    if jitter:
        bumped = col.copy()
        bumped[0] += 1e-10 * col[0].real
        L, ok = kernels.toeplitz_cholesky_raw(bumped)
        if ok:
            return L
    raise NotPositiveDefinite("covariance is not numerically positive definite")


def build_full_covariance(model):
    """Full covariance R = sum of mode covariances + alpha0*I (verified PD)."""
    col = covariance_lags(model)
    cholesky_lags(col)
    return _toeplitz_from_lags(col)


def sample_observation(model, m_snapshots, seed):
    """Draw i.i.d. circular complex Gaussian snapshots with covariance R.

    Snapshots are generated as L @ w with L the Cholesky factor of the full
    covariance and w standard circular complex Gaussian; deterministic for a
    fixed seed.
    """
    if m_snapshots < 1:
        raise InvalidDim(f"m_snapshots must be >= 1, got {m_snapshots}")
    L = cholesky_lags(covariance_lags(model))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, model.n_f, m_snapshots))
    w = (z[0] + 1j * z[1]) / np.sqrt(2.0)
    return ChannelObservation(data=L @ w)


def expected_pdp(model):
    """Mean power-delay profile of the model, linear domain.

    Returns sqrt(n_f) * diag(F* R F) with F the unitary DFT matrix, computed
    in O(n log n) from the Toeplitz structure.
    """
    n = model.n_f
    col = covariance_lags(model)
    weighted = (n - np.arange(n)) * col
    partial = np.fft.ifft(weighted) * n
    values = (2.0 * partial.real - n * col[0].real) / np.sqrt(n)
    return Pdp(values=values, domain=LINEAR)


def preprocess(obs):
    """Average magnitude-square of the unitary inverse DFT of each snapshot,
    scaled by sqrt(n_f): the linear-domain power-delay profile of a residual.
    """
    delay = np.fft.ifft(obs.data, axis=0, norm="ortho")
    values = np.sqrt(obs.n_f) / obs.m_snapshots * np.sum(np.abs(delay) ** 2, axis=1)
    return Pdp(values=values, domain=LINEAR)


def normalize(pdp):
    """Log-normalize a linear PDP so its maximum is exactly 0.

    The linear maximum is stored in `scale` so denormalize() can undo this.
    """
    if pdp.domain != LINEAR:
        raise InvalidParam("normalize expects a linear-domain PDP")
    if np.any(pdp.values <= 0):
        raise NonPositiveInput("PDP must be strictly positive to normalize")
    scale = float(np.max(pdp.values))
    values = np.log(pdp.values) - np.log(scale)
    values[np.argmax(pdp.values)] = 0.0
    return Pdp(values=values, domain=LOG_NORMALIZED, scale=scale)


def denormalize(pdp):
    """Invert normalize(): back to the linear domain using the stored scale."""
    if pdp.domain != LOG_NORMALIZED or pdp.scale is None:
        raise InvalidParam("denormalize expects a log-normalized PDP with a scale")
    return Pdp(values=pdp.scale * np.exp(pdp.values), domain=LINEAR)
