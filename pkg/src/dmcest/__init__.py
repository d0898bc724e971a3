"""Estimation of multi-modal dense multipath components from channel residuals.

Subpackages/modules:
    model       parametric covariance model, synthetic sampling, PDP preprocessing
    likelihood  NLL, score and Fisher information in the log-reparametrized domain
    estimator   moment initialization, damped-Newton refinement, multi-mode driver
    net         1D convolutional autoencoder (mode separation + model order)
    crb         delay CRB of a specular path embedded in DMC, mismatch experiment
    dmct        binary tensor file format used across the CLI
"""

from dmcest.errors import (
    DegenerateInput,
    DivergedLoss,
    DmcError,
    InvalidDim,
    InvalidParam,
    NoDescentDirection,
    NonPositiveInput,
    NotPositiveDefinite,
    OrderMismatch,
    ShapeMismatch,
    SingularFim,
)

__version__ = "0.1.0"
