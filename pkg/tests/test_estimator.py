import numpy as np
import pytest

from dmcest.errors import NoDescentDirection, OrderMismatch
from dmcest.estimator import (
    FitReport,
    LmOptions,
    estimate_multimode,
    init_single_mode,
    lm_refine,
)
from dmcest.likelihood import SufficientStats, fim, nll, pack_eta
from dmcest.model import (
    DmcModel,
    ModeParams,
    Pdp,
    expected_pdp,
    preprocess,
    sample_observation,
)


def unpack4(eta):
    return np.exp(eta[0]), np.exp(eta[1]), eta[2], np.exp(eta[3])


class TestInitSingleMode:
    def test_toy_vector_exact(self):
        eta = init_single_mode(Pdp(values=np.array([1.0, 1.0, 5.0, 3.0, 2.0])))
        d1, d2, d3, a0 = unpack4(eta)
        assert a0 == 1.0
        assert d1 == 4.0
        assert abs(d2 - 4.0 / 55.0) < 1e-15
        assert d3 == 0.25

    def test_constant_profile_degenerate_branch(self):
        eta = init_single_mode(Pdp(values=np.full(4, 2.0)))
        d1, d2, d3, a0 = unpack4(eta)
        assert a0 == 2.0
        assert abs(d1 - 2e-6) < 1e-18
        assert d3 == 0.0

    def test_recovers_base_delay_from_clean_profile(self):
        n = 256
        for delta3 in (0.1, 0.37, 0.62):
            model = DmcModel(
                modes=(ModeParams(2000.0, 15.0, delta3),), alpha0=1.0, n_f=n
            )
            eta = init_single_mode(expected_pdp(model))
            assert abs(eta[2] - delta3) <= 2.0 / n


class TestLmRefine:
    def test_start_at_truth_converges_quickly(self):
        model = DmcModel(modes=(ModeParams(20.0, 5.0, 0.3),), alpha0=1.0, n_f=64)
        obs = sample_observation(model, 512, seed=0)
        stats = SufficientStats.from_observation(obs)
        eta_true = pack_eta(model)
        report = lm_refine(stats, eta_true)
        assert report.converged
        assert report.iterations <= 5
        assert np.max(np.abs(report.eta_hat - eta_true)) < 0.2

    def test_trace_non_increasing(self):
        rng = np.random.default_rng(1)
        for trial in range(5):
            model = DmcModel(
                modes=(ModeParams(50.0, 8.0, float(rng.uniform(0, 0.8))),),
                alpha0=1.0,
                n_f=48,
            )
            obs = sample_observation(model, 24, seed=(50, trial))
            stats = SufficientStats.from_observation(obs)
            eta0 = init_single_mode(preprocess(obs))
            report = lm_refine(stats, eta0)
            trace = np.array(report.nll_trace)
            assert np.all(np.diff(trace) <= 0)

    def test_single_mode_recovery_within_crb(self):
        n, msnap = 128, 32
        delta2 = np.log(2.0) * n / 20.0
        truth = DmcModel(
            modes=(ModeParams(100.0 * delta2, delta2, 0.35),), alpha0=1.0, n_f=n
        )
        eta_true = pack_eta(truth)
        crb_delay = np.linalg.inv(fim(eta_true, n, msnap))[2, 2]
        hits = 0
        trials = 20
        for trial in range(trials):
            obs = sample_observation(truth, msnap, seed=(7, trial))
            stats = SufficientStats.from_observation(obs)
            report = lm_refine(stats, init_single_mode(preprocess(obs)))
            err = abs(report.eta_hat[2] - 0.35)
            if err <= 3.0 * np.sqrt(crb_delay):
                hits += 1
        assert hits >= 0.9 * trials

    def test_refinement_improves_on_initialization(self):
        model = DmcModel(modes=(ModeParams(30.0, 6.0, 0.2),), alpha0=1.0, n_f=64)
        obs = sample_observation(model, 32, seed=3)
        stats = SufficientStats.from_observation(obs)
        eta0 = init_single_mode(preprocess(obs))
        report = lm_refine(stats, eta0)
        assert report.nll_trace[-1] <= nll(stats, eta0)

    def test_no_descent_raises_at_start(self):
        # exact stationary point with a huge gradient tolerance never triggers,
        # and every damped step from the exact optimum of this quadratic-like
        # profile fails to strictly decrease: use an exactly-white S
        stats = SufficientStats(sample_covariance=np.eye(8), m_snapshots=4)
        eta0 = np.array([0.0])  # alpha0 = 1 = exact minimizer
        opts = LmOptions(grad_tol=0.0, max_inflations=5)
        with pytest.raises(NoDescentDirection):
            lm_refine(stats, eta0, opts)


class TestEstimateMultimode:
    def test_order_zero_closed_form(self):
        noise = DmcModel(modes=(), alpha0=2.0, n_f=32)
        obs = sample_observation(noise, 4096, seed=4)
        model, report = estimate_multimode(obs, [], 0)
        assert model.order == 0
        assert model.alpha0 == np.mean(preprocess(obs).values)
        assert report.iterations == 0 and report.converged

    def test_order_mismatch_raises(self):
        obs = sample_observation(DmcModel(modes=(), alpha0=1.0, n_f=16), 4, seed=0)
        with pytest.raises(OrderMismatch):
            estimate_multimode(obs, [], 1)
        with pytest.raises(OrderMismatch):
            estimate_multimode(obs, [], 5)

    def test_ground_truth_separation_reduces_to_single_mode_pipeline(self):
        truth = DmcModel(modes=(ModeParams(400.0, 10.0, 0.3),), alpha0=1.0, n_f=64)
        obs = sample_observation(truth, 32, seed=5)
        sep = expected_pdp(DmcModel(modes=truth.modes, alpha0=1e-30, n_f=64))
        model, report = estimate_multimode(obs, [sep], 1)

        stats = SufficientStats.from_observation(obs)
        eta0 = init_single_mode(sep)
        eta0[-1] = np.log(np.min(preprocess(obs).values))
        manual = lm_refine(stats, eta0)
        assert np.array_equal(report.eta_hat, manual.eta_hat)
        assert report.nll_trace == manual.nll_trace

    def test_separation_order_does_not_matter(self):
        m1 = ModeParams(300.0, 8.0, 0.15)
        m2 = ModeParams(150.0, 12.0, 0.6)
        truth = DmcModel(modes=(m1, m2), alpha0=1.0, n_f=96)
        obs = sample_observation(truth, 64, seed=6)
        seps = [
            expected_pdp(DmcModel(modes=(m,), alpha0=1e-30, n_f=96)) for m in (m1, m2)
        ]
        model_a, _ = estimate_multimode(obs, seps, 2)
        model_b, _ = estimate_multimode(obs, seps[::-1], 2)
        for a, b in zip(model_a.modes, model_b.modes):
            assert abs(a.delta3 - b.delta3) < 1e-6
            assert abs(np.log(a.delta1 / b.delta1)) < 1e-4

    def test_two_well_separated_modes_recovered(self):
        n, msnap = 256, 64
        delta2 = np.log(2.0) * n / 25.0
        m1 = ModeParams(400.0 * delta2, delta2, 0.1)
        m2 = ModeParams(300.0 * delta2, delta2, 0.6)
        truth = DmcModel(modes=(m1, m2), alpha0=1.0, n_f=n)
        seps = [
            expected_pdp(DmcModel(modes=(m,), alpha0=1e-30, n_f=n)) for m in (m1, m2)
        ]
        hits = 0
        trials = 10
        for trial in range(trials):
            obs = sample_observation(truth, msnap, seed=(90, trial))
            model, _ = estimate_multimode(obs, seps, 2)
            d3 = sorted(m.delta3 for m in model.modes)
            if abs(d3[0] - 0.1) <= 2.0 / n and abs(d3[1] - 0.6) <= 2.0 / n:
                hits += 1
        assert hits >= 0.9 * trials


class TestFitReport:
    def test_json_round_trip(self, tmp_path):
        report = FitReport(
            eta_hat=np.array([0.1, -0.2, 0.3, -4.0]),
            nll_trace=(10.0, 8.5, 8.2),
            iterations=2,
            converged=True,
            termination_reason="step_tol",
        )
        path = tmp_path / "fit.json"
        report.save_json(path)
        import json

        with open(path) as fh:
            loaded = FitReport.from_json_dict(json.load(fh))
        assert np.array_equal(loaded.eta_hat, report.eta_hat)
        assert loaded.nll_trace == report.nll_trace
        assert loaded.termination_reason == "step_tol"
