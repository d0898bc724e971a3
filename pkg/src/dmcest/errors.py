"""Exception types shared across the package."""


class DmcError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DmcError):
    """Invalid or inconsistent run configuration."""


class InvalidParam(DmcError):
    """A model parameter violates its domain constraints."""


class InvalidDim(DmcError):
    """A dimension argument is out of range."""


class NotPositiveDefinite(DmcError):
    """A covariance matrix failed its Cholesky factorization."""


class NonPositiveInput(DmcError):
    """An input required to be strictly positive contains values <= 0."""


class DegenerateInput(DmcError):
    """Input is degenerate for the requested operation (e.g. constant PDP)."""


class ShapeMismatch(DmcError):
    """Tensor shapes are inconsistent with the operation's contract."""


class OrderMismatch(DmcError):
    """Number of separated modes does not match the requested model order."""


class NoDescentDirection(DmcError):
    """Damped-Newton step failed to decrease the objective at the start point."""


class SingularFim(DmcError):
    """Fisher information matrix is numerically singular."""


class DivergedLoss(DmcError):
    """Training loss became non-finite."""
