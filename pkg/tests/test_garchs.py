"""Tests for the GARCH-S density, filter, likelihood, fitting and simulator."""

import io
import math

import numpy as np
import pytest
from scipy import integrate, stats

from crashskew.cli import BENCHMARK
from crashskew.errors import ConvergenceError, DataValidationError
from crashskew.garchs import (
    FitOptions,
    GarchSParams,
    ShockForm,
    fit_garch11,
    fit_garchs,
    fit_summary,
    filter_paths,
    gc_cdf,
    gc_log_density,
    information_criteria,
    likelihood_gradient,
    load_paths_csv,
    neg_log_likelihood,
    settled,
    simulate_garchs,
    to_natural,
    to_unconstrained,
    write_paths_csv,
)
from crashskew.ingest import ReturnSeries

GAUSSIAN = GarchSParams(mu=0.0, alpha0=1e-5, alpha1=0.05, alpha2=0.9)
SKEWED = GarchSParams(mu=0.0, alpha0=1e-5, alpha1=0.117, alpha2=0.873, beta0=1e-5, beta1=0.036, beta2=0.148)


def _returns(values, start="2020-01-01") -> ReturnSeries:
    dates = np.datetime64(start) + np.arange(len(values))
    return ReturnSeries(dates=dates, values=values)


def _gaussian_garch_nll(r, mu, alpha0, alpha1, alpha2):
    eps = r - mu
    h = np.var(eps, ddof=1)
    total = 0.0
    for t in range(len(r)):
        if t > 0:
            h = alpha0 + alpha1 * eps[t - 1] ** 2 + alpha2 * h
        total += 0.5 * (math.log(2 * math.pi) + math.log(h) + eps[t] ** 2 / h)
    return total


class TestGcDensity:
    """Test the Gram-Charlier density and CDF."""

    def test_standard_normal_at_zero(self):
        assert gc_log_density(0.0, 0.0) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_closed_form_value(self):
        expected = stats.norm.logpdf(1.0) + math.log((5 / 6) ** 2) - math.log(1 + 0.25 / 6)
        assert gc_log_density(1.0, 0.5) == pytest.approx(expected, abs=1e-12)
        assert gc_log_density(1.0, 0.5) == pytest.approx(-1.82437, abs=1e-4)

    @pytest.mark.parametrize("s", [-1.0, -0.5, 0.0, 0.5, 0.8, 1.0])
    def test_integrates_to_one(self, s):
        total, _ = integrate.quad(lambda x: math.exp(gc_log_density(x, s)), -12, 12, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_reduces_to_normal(self):
        grid = np.linspace(-5, 5, 101)
        np.testing.assert_allclose(np.exp(gc_log_density(grid, 0.0)), stats.norm.pdf(grid), rtol=0, atol=1e-12)

    def test_joint_sign_flip_symmetry(self):
        grid = np.linspace(-6, 6, 241)
        for s in (-0.7, 0.3, 1.4):
            assert np.array_equal(gc_log_density(-grid, -s), gc_log_density(grid, s))

    def test_non_finite_input(self):
        with pytest.raises(ValueError):
            gc_log_density(float("nan"), 0.1)

    def test_cdf_matches_quadrature(self):
        for s in (-0.8, 0.4):
            for x in (-2.0, 0.0, 1.5):
                area, _ = integrate.quad(lambda u: math.exp(gc_log_density(u, s)), -12, x, limit=200)
                assert gc_cdf(x, s) == pytest.approx(area, abs=1e-8)

    def test_cdf_limits(self):
        assert gc_cdf(-12.0, 0.5) == pytest.approx(0.0, abs=1e-12)
        assert gc_cdf(12.0, 0.5) == pytest.approx(1.0, abs=1e-12)


class TestParams:
    """Test GarchSParams validation and reparameterisation."""

    def test_stationarity_message(self):
        with pytest.raises(ValueError) as err:
            GarchSParams(alpha1=0.117, alpha2=0.889)
        assert "alpha1+alpha2" in str(err.value)

    def test_beta2_bound(self):
        with pytest.raises(ValueError):
            GarchSParams(beta2=1.0)

    def test_alpha0_positive(self):
        with pytest.raises(ValueError):
            GarchSParams(alpha0=0.0)

    def test_array_round_trip(self):
        assert GarchSParams.from_array(SKEWED.as_array()) == SKEWED

    def test_reparameterisation_inverts(self):
        theta = SKEWED.as_array()
        np.testing.assert_allclose(to_natural(to_unconstrained(theta)), theta, rtol=1e-10, atol=1e-15)


class TestFilterPaths:
    """Test the variance and skewness recursions."""

    def test_constant_variance_without_arch_terms(self):
        r = _returns([0.01, -0.02, 0.015, 0.003, -0.007])
        paths = filter_paths(r, GarchSParams(alpha0=2e-4, alpha1=0.0, alpha2=0.0))
        np.testing.assert_allclose(paths.h[1:], 2e-4, rtol=0, atol=1e-18)

    def test_constant_skewness_without_dynamics(self):
        r = _returns([0.01, -0.02, 0.015, 0.003, -0.007])
        paths = filter_paths(r, GarchSParams(beta0=0.05, beta1=0.0, beta2=0.0))
        np.testing.assert_allclose(paths.s[1:], 0.05, rtol=0, atol=1e-18)

    def test_hand_unrolled_recursion(self):
        values = np.array([0.01, -0.02, 0.015])
        params = GarchSParams(mu=0.001, alpha0=1e-5, alpha1=0.1, alpha2=0.8, beta0=0.01, beta1=0.05, beta2=0.3)
        paths = filter_paths(_returns(values), params, ShockForm.CUBED)

        eps = values - params.mu
        h = [np.var(eps, ddof=1)]
        s = [params.beta0 / (1 - params.beta2)]
        eta = [eps[0] / math.sqrt(h[0])]
        for t in (1, 2):
            h.append(params.alpha0 + params.alpha1 * eps[t - 1] ** 2 + params.alpha2 * h[t - 1])
            s.append(params.beta0 + params.beta1 * eta[t - 1] ** 3 + params.beta2 * s[t - 1])
            eta.append(eps[t] / math.sqrt(h[t]))
        np.testing.assert_allclose(paths.h, h, rtol=0, atol=1e-14)
        np.testing.assert_allclose(paths.s, s, rtol=0, atol=1e-14)
        np.testing.assert_allclose(paths.eta, eta, rtol=0, atol=1e-14)

    def test_zero_variance_returns(self):
        with pytest.raises(DataValidationError):
            filter_paths(_returns([0.01] * 10), GAUSSIAN)

    def test_squared_shocks_never_go_below_start(self):
        r = simulate_garchs(SKEWED, 2000, seed=5)
        paths = filter_paths(r, SKEWED, ShockForm.SQUARED)
        floor = min(paths.s[0], SKEWED.beta0 / (1 - SKEWED.beta2))
        assert np.all(paths.s >= floor - 1e-15)

    def test_cubed_negative_shocks_push_skewness_down(self):
        rng = np.random.default_rng(11)
        values = -np.abs(rng.normal(0.0, 0.01, size=1000))
        values[::50] -= 0.06
        paths = filter_paths(_returns(values), SKEWED, ShockForm.CUBED)
        assert paths.s.mean() < SKEWED.beta0 / (1 - SKEWED.beta2)
        assert paths.s.min() < 0


class TestLikelihood:
    """Test the negative log-likelihood and its gradient."""

    def test_gaussian_reduction(self):
        r = simulate_garchs(GAUSSIAN, 500, seed=1)
        expected = _gaussian_garch_nll(r.values, GAUSSIAN.mu, GAUSSIAN.alpha0, GAUSSIAN.alpha1, GAUSSIAN.alpha2)
        assert neg_log_likelihood(r, GAUSSIAN) == pytest.approx(expected, abs=1e-10)

    def test_decomposition(self):
        r = simulate_garchs(SKEWED, 500, seed=2)
        paths = filter_paths(r, SKEWED)
        expected = -np.sum(gc_log_density(paths.eta, paths.s)) + 0.5 * np.sum(np.log(paths.h))
        assert neg_log_likelihood(r, SKEWED) == pytest.approx(expected, rel=1e-12)

    def test_gradient_step_agreement(self):
        r = simulate_garchs(SKEWED, 500, seed=3)
        rng = np.random.default_rng(4)
        for _ in range(5):
            point = GarchSParams(
                mu=rng.uniform(-5e-4, 5e-4),
                alpha0=rng.uniform(5e-6, 2e-5),
                alpha1=rng.uniform(0.05, 0.15),
                alpha2=rng.uniform(0.7, 0.8),
                beta0=rng.uniform(-0.05, 0.05),
                beta1=rng.uniform(0.0, 0.1),
                beta2=rng.uniform(0.0, 0.5),
            )
            coarse = likelihood_gradient(r, point, rel_step=1e-5)
            fine = likelihood_gradient(r, point, rel_step=1e-6)
            np.testing.assert_allclose(coarse, fine, rtol=1e-4, atol=1e-6 * np.abs(coarse).max())

    def test_gradient_uses_documented_step(self):
        r = simulate_garchs(SKEWED, 300, seed=5)
        theta = SKEWED.as_array()
        steps = 1e-5 * np.maximum(np.abs(theta), 1e-3)
        expected = []
        for i, step in enumerate(steps):
            up, down = theta.copy(), theta.copy()
            up[i] += step
            down[i] -= step
            expected.append(
                (neg_log_likelihood(r, GarchSParams.from_array(up)) - neg_log_likelihood(r, GarchSParams.from_array(down)))
                / (2 * step)
            )
        np.testing.assert_allclose(likelihood_gradient(r, SKEWED, rel_step=1e-5), expected, rtol=1e-9, atol=1e-9)

    def test_true_parameters_fit_better_on_average(self):
        perturbed = GarchSParams(mu=0.0, alpha0=1.5e-5, alpha1=0.15, alpha2=0.83, beta0=1e-5, beta1=0.0, beta2=0.3)
        gaps = []
        for seed in range(50):
            r = simulate_garchs(SKEWED, 2000, seed=100 + seed)
            gaps.append(neg_log_likelihood(r, perturbed) - neg_log_likelihood(r, SKEWED))
        assert np.mean(gaps) > 0

    def test_information_criteria(self):
        aic, sic = information_criteria(1802.220, 7, 789)
        assert aic == pytest.approx(-4.550621, abs=1e-6)
        assert sic == pytest.approx(-4.509182, abs=1e-6)


class TestSimulate:
    """Test the GARCH-S simulator."""

    def test_deterministic(self):
        a = simulate_garchs(SKEWED, 300, seed=9)
        b = simulate_garchs(SKEWED, 300, seed=9)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.dates, b.dates)

    def test_weekday_dates(self):
        r = simulate_garchs(SKEWED, 20, seed=0, start="2020-01-03")
        weekdays = (r.dates.astype("datetime64[D]").view("int64") - 4) % 7
        assert np.all(weekdays < 5)
        assert np.datetime_as_string(r.dates[0]) == "2020-01-03"

    def test_unconditional_variance(self):
        r = simulate_garchs(GAUSSIAN, 50_000, seed=21)
        assert np.var(r.values) == pytest.approx(GAUSSIAN.unconditional_variance, rel=0.10)

    def test_symmetric_residuals_without_skewness(self):
        r = simulate_garchs(GAUSSIAN, 50_000, seed=22)
        eta = filter_paths(r, GAUSSIAN).eta
        assert abs(stats.skew(eta)) < 0.1

    def test_rejects_short_length(self):
        with pytest.raises(ValueError):
            simulate_garchs(SKEWED, 1, seed=0)


class TestFit:
    """Test GARCH(1,1) and GARCH-S fitting."""

    def test_refuses_short_series(self):
        with pytest.raises(DataValidationError):
            fit_garchs(simulate_garchs(SKEWED, 99, seed=0))

    def test_garch11_refuses_constant_returns(self):
        with pytest.raises(DataValidationError):
            fit_garch11(_returns([0.001] * 150))

    def test_garch11_recovers_persistence(self):
        r = simulate_garchs(GarchSParams(alpha0=1e-5, alpha1=0.1, alpha2=0.85), 5000, seed=8)
        fit = fit_garch11(r)
        assert fit.alpha1 + fit.alpha2 == pytest.approx(0.95, abs=0.05)

    def test_fit_properties(self):
        r = simulate_garchs(SKEWED, 1500, seed=12)
        fit = fit_garchs(r, FitOptions(multistart=2, seed=0))
        assert fit.converged
        assert len(fit.paths) == len(r)
        assert all(start.loglik >= start.start_loglik for start in fit.starts)
        assert fit.loglik >= max(start.start_loglik for start in fit.starts)
        assert all(b <= a for a, b in zip(fit.trace, fit.trace[1:]))
        for name, t in fit.tstat.items():
            se = fit.stderr[name]
            if math.isfinite(se) and se > 0:
                assert t == pytest.approx(getattr(fit.params, name) / se)
        aic, sic = information_criteria(fit.loglik, 7, len(r))
        assert (fit.aic, fit.sic) == (aic, sic)
        assert any("-4.556/-4.514" in note for note in fit.notes)

    def test_no_converged_start(self):
        r = simulate_garchs(SKEWED, 300, seed=13)
        with pytest.raises(ConvergenceError) as err:
            fit_garchs(r, FitOptions(multistart=1, max_iterations=1))
        assert err.value.iterations >= 1

    def test_stall_at_optimum_counts_as_converged(self):
        r = simulate_garchs(BENCHMARK, 5000, seed=1003)
        fit = fit_garchs(r, FitOptions(multistart=1, seed=3))
        assert fit.converged
        assert fit.starts[0].converged

    def test_date_relabeling(self):
        r = simulate_garchs(SKEWED, 400, seed=16)
        moved = ReturnSeries(dates=r.dates + np.timedelta64(3000, "D"), values=r.values)
        a = fit_garchs(r, FitOptions(multistart=1))
        b = fit_garchs(moved, FitOptions(multistart=1))
        assert a.loglik == b.loglik
        assert a.params == b.params
        assert np.array_equal(a.paths.s, b.paths.s)

    def test_summary_keys(self):
        r = simulate_garchs(SKEWED, 400, seed=14)
        summary = fit_summary(fit_garchs(r, FitOptions(multistart=1, shock_form="squared")))
        assert summary["shock_form"] == "squared"
        assert summary["seed"] == 0
        for name in ("alpha1", "alpha1_stderr", "alpha1_tstat", "aic", "sic", "loglik"):
            assert name in summary


class TestPathsCsv:
    """Test the paths file format."""

    def test_written_paths_load_back(self, tmp_path):
        r = simulate_garchs(SKEWED, 50, seed=15)
        paths = filter_paths(r, SKEWED)
        target = tmp_path / "skew_series.csv"
        write_paths_csv(paths, target)
        assert target.read_text().splitlines()[0] == "date,h,s,eta"
        loaded = load_paths_csv(target)
        assert np.array_equal(loaded.dates, paths.dates)
        assert np.array_equal(loaded.s, paths.s)
        assert np.array_equal(loaded.h, paths.h)

    def test_non_positive_variance_rejected(self):
        text = b"date,h,s,eta\n2020-01-01,0.0001,0.1,0.5\n2020-01-02,-0.0001,0.1,0.5\n"
        with pytest.raises(DataValidationError):
            load_paths_csv(io.BytesIO(text))


class TestSettled:
    """Test the stopping rule shared by the optimizers."""

    def test_small_relative_step(self):
        assert settled([-9995.317, -9995.358, -9995.358000001], np.array([1.0, 1.0]), 1e-9)

    def test_flat_gradient_after_line_search_failure(self):
        assert settled([-9995.317, -9995.358], np.array([8.7e-5, -2e-6]), 1e-9)

    def test_still_moving(self):
        assert not settled([-9990.0, -9995.358], np.array([0.5, 0.1]), 1e-9)

    def test_non_finite_gradient(self):
        assert not settled([-10.0], np.array([np.nan, 0.0]), 1e-9)
