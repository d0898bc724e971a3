"""Classical initialization and damped-Newton refinement of mode parameters.

The single-mode initializer turns a linear-domain power-delay profile into a
starting point: noise floor from the profile minimum, power from the peak
excess, decay from the normalized l1 mass, base delay from the largest
forward difference. Refinement runs a Levenberg-Marquardt style iteration on
the packed log-domain parameters, using the Fisher information as curvature:

    step = (FIM + mu*I)^-1 * (-score)

with multiplicative damping control; steps are only accepted when they
decrease the objective, so the reported objective trace is non-increasing.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from dmcest.errors import (
    InvalidDim,
    InvalidParam,
    NoDescentDirection,
    NonPositiveInput,
    OrderMismatch,
)
from dmcest.likelihood import (
    SufficientStats,
    nll,
    pack_eta,
    score_and_fim,
    unpack_eta,
)
from dmcest.model import LINEAR, MAX_MODES, DmcModel, preprocess


@dataclass(frozen=True)
class LmOptions:
    mu0: float = 1e-2
    mu_up: float = 10.0
    mu_down: float = 0.1
    max_iters: int = 200
    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    max_inflations: int = 20
    # stop once 3 consecutive accepted steps improve by less than
    # ftol * (1 + |objective|); catches flat directions (e.g. a noise floor
    # buried under mode tails) that would otherwise crawl to max_iters
    ftol: float = 1e-9

    def __post_init__(self):
        if min(self.mu0, self.mu_up, self.mu_down) <= 0:
            raise InvalidParam("damping parameters must be positive")
        if not self.mu_down < 1.0 < self.mu_up:
            raise InvalidParam("need mu_down < 1 < mu_up")


@dataclass(frozen=True)
class FitReport:
    eta_hat: np.ndarray
    nll_trace: tuple
    iterations: int
    converged: bool
    termination_reason: str

    def to_json_dict(self):
        return {
            "eta_hat": [float(v) for v in self.eta_hat],
            "nll_trace": [float(v) for v in self.nll_trace],
            "iterations": self.iterations,
            "converged": self.converged,
            "termination_reason": self.termination_reason,
        }

    @classmethod
    def from_json_dict(cls, doc):
        return cls(
            eta_hat=np.asarray(doc["eta_hat"], dtype=np.float64),
            nll_trace=tuple(doc["nll_trace"]),
            iterations=doc["iterations"],
            converged=doc["converged"],
            termination_reason=doc["termination_reason"],
        )

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def init_single_mode(pdp):
    """Moment-style starting point for one mode, packed to the log domain."""
    if pdp.domain != LINEAR:
        raise InvalidParam("initialization expects a linear-domain PDP")
    d = pdp.values
    n = d.shape[0]
    if n < 3:
        raise InvalidDim(f"need at least 3 PDP bins, got {n}")
    if np.any(d <= 0):
        raise NonPositiveInput("PDP entries must be strictly positive")
    alpha0 = float(np.min(d))
    delta1 = float(np.max(d)) - alpha0
    if delta1 == 0.0:
        # constant profile: no mode visible, keep a tiny positive power
        delta1 = 1e-6 * alpha0
    delta2 = delta1 / (n * (float(np.sum(d)) - alpha0))
    delta3 = float(np.argmax(np.diff(d))) / (n - 1)
    return np.array([np.log(delta1), np.log(delta2), delta3, np.log(alpha0)])


def _wrap_delays(eta):
    out = eta.copy()
    m = (len(eta) - 1) // 3
    for i in range(m):
        out[3 * i + 2] %= 1.0
    return out


def lm_refine(stats, eta0, opts=LmOptions()):
    """Minimize the residual NLL from eta0; returns a FitReport.

    Candidate steps solve (FIM + mu I) step = -score; a step is accepted only
    if it decreases the objective, otherwise mu is inflated and the step
    recomputed (up to opts.max_inflations times per iteration).
    """
    eta = _wrap_delays(np.asarray(eta0, dtype=np.float64))
    current = nll(stats, eta)  # raises NotPositiveDefinite for a bad start
    trace = [current]
    mu = opts.mu0
    reason = "max_iters"
    converged = False
    iterations = 0
    improvement = None
    tiny_streak = 0
    for iterations in range(1, opts.max_iters + 1):
        grad, fisher = score_and_fim(stats, eta)
        if np.max(np.abs(grad)) < opts.grad_tol:
            reason = "grad_tol"
            converged = True
            iterations -= 1
            break
        accepted = False
        for _ in range(opts.max_inflations):
            try:
                cho = scipy.linalg.cho_factor(
                    fisher + mu * np.eye(len(eta)), lower=True, check_finite=False
                )
                step = scipy.linalg.cho_solve(cho, -grad, check_finite=False)
                candidate = _wrap_delays(eta + step)
                value = nll(stats, candidate)
            except Exception:
                mu *= opts.mu_up
                continue
            if np.isfinite(value) and value < current:
                improvement = current - value
                eta = candidate
                current = value
                trace.append(value)
                mu *= opts.mu_down
                accepted = True
                break
            mu *= opts.mu_up
        if not accepted:
            if iterations == 1:
                raise NoDescentDirection(
                    f"no decreasing step found after {opts.max_inflations} inflations"
                )
            # stalling right at the objective's floating-point floor counts
            # as convergence; stalling with real progress left does not
            reason = "stalled"
            converged = improvement is not None and improvement <= 1e-10 * max(
                1.0, abs(current)
            )
            break
        if np.max(np.abs(step)) < opts.step_tol:
            reason = "step_tol"
            converged = True
            break
        if improvement <= opts.ftol * (1.0 + abs(current)):
            tiny_streak += 1
            if tiny_streak >= 3:
                reason = "ftol"
                converged = True
                break
        else:
            tiny_streak = 0
    return FitReport(
        eta_hat=eta,
        nll_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
        termination_reason=reason,
    )


def estimate_multimode(residual, separations, model_order, opts=LmOptions()):
    """Initialize one mode per separated PDP, then jointly refine on the
    full residual statistics. Returns (canonical DmcModel, FitReport).
    """
    if not 0 <= model_order <= MAX_MODES:
        raise OrderMismatch(f"model order must be in 0..{MAX_MODES}, got {model_order}")
    if len(separations) != model_order:
        raise OrderMismatch(
            f"got {len(separations)} separations for model order {model_order}"
        )
    total = preprocess(residual)
    stats = SufficientStats.from_observation(residual)
    if model_order == 0:
        alpha0 = float(np.mean(total.values))
        eta = np.array([np.log(alpha0)])
        report = FitReport(
            eta_hat=eta,
            nll_trace=(nll(stats, eta),),
            iterations=0,
            converged=True,
            termination_reason="closed_form",
        )
        return DmcModel(modes=(), alpha0=alpha0, n_f=residual.n_f), report
    eta0 = np.empty(3 * model_order + 1)
    for i, sep in enumerate(separations):
        eta0[3 * i:3 * i + 3] = init_single_mode(sep)[:3]
    eta0[-1] = np.log(np.min(total.values))
    report = lm_refine(stats, eta0, opts)
    return unpack_eta(report.eta_hat, residual.n_f), report
