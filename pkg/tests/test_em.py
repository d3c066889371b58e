import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from mixmoments.datasets import SpecialDataSpec, sample_mixture
from mixmoments.em import compare_mom_em, em_fit, log_likelihood, mixture_density, quantile_init
from mixmoments.errors import DimensionError, DomainError
from mixmoments.models import EMOptions, GaussianComponent, MixtureModel
from mixmoments.moments import Dataset, gaussian_moments_1d, sample_moments
from mixmoments.pearson import fit_mom


@pytest.fixture
def mom7():
    return SpecialDataSpec(K=7).mom_estimate()


def test_standard_normal_at_zero():
    value = log_likelihood(MixtureModel.single(0.0, 1.0), Dataset([0.0]))
    assert value == pytest.approx(-0.5 * math.log(2 * math.pi))
    assert value == pytest.approx(-0.9189385, abs=1e-7)


def test_log_likelihood_of_the_moment_estimate(special7, mom7):
    assert log_likelihood(mom7, special7) == pytest.approx(-28.79618895, abs=1e-5)


def test_log_likelihood_ignores_component_order(special7):
    forward = MixtureModel.univariate(0.3, 2.0, 6.0, 1.5, 0.8)
    swapped = MixtureModel(
        weights=[forward.weights[1], forward.weights[0]],
        components=[forward.components[1], forward.components[0]],
    )
    assert log_likelihood(forward, special7) == log_likelihood(swapped, special7)


def test_log_likelihood_errors(special7):
    with pytest.raises(DomainError):
        log_likelihood(MixtureModel.univariate(0.5, 0.0, 1.0, 0.0, 1.0), special7)
    with pytest.raises(DimensionError):
        log_likelihood(MixtureModel.single(0.0, 1.0), Dataset([[0.0, 1.0]]))
    bivariate = MixtureModel(weights=[1.0], components=[GaussianComponent(mean=[0.0, 0.0], covariance=[[1.0, 0.0], [0.0, 1.0]])])
    with pytest.raises(DimensionError):
        log_likelihood(bivariate, special7)


def test_em_from_the_moment_estimate(special7, mom7):
    result = em_fit(special7, mom7)
    assert result.converged
    assert result.loglik == pytest.approx(-28.43415, abs=1e-3)
    lam, mu, nu, sigma2, tau2 = result.model.univariate_parameters()
    assert lam == pytest.approx(0.5, abs=1e-4)
    assert sigma2 == pytest.approx(tau2, abs=1e-4)
    assert sorted([mu, nu]) == pytest.approx([2.420362, 5.77968], abs=1e-3)
    assert math.sqrt(sigma2) == pytest.approx(1.090329, abs=1e-3)
    assert result.loglik > log_likelihood(mom7, special7)


def test_em_stays_at_a_fixed_point():
    data = Dataset([-1.0, 1.0])
    init = MixtureModel.univariate(0.5, 0.0, 0.0, 1.0, 1.0)
    result = em_fit(data, init)
    assert result.iters <= 1
    assert result.converged
    assert result.model.univariate_parameters() == pytest.approx(init.univariate_parameters(), abs=1e-9)


def test_em_trace_is_monotone(fig1_model):
    data = sample_mixture(fig1_model, 2000, seed=7)
    result = em_fit(data, fig1_model, EMOptions(record_trace=True, loglik_tol=1e-9))
    trace = np.array(result.trace)
    assert trace.size == result.iters + 1
    assert np.all(np.diff(trace) >= -1e-12 * np.abs(trace[:-1]).max())
    assert math.fsum(result.model.weights) == pytest.approx(1.0)
    assert all(0.0 <= w <= 1.0 for w in result.model.weights)


def test_em_trace_is_off_by_default(special7, mom7):
    assert em_fit(special7, mom7, EMOptions(max_iters=5)).trace is None


def test_em_reports_the_variance_floor():
    data = Dataset([0.0, 0.0, 5.0, 6.0, 7.0])
    init = MixtureModel.univariate(0.4, 0.0, 6.0, 0.01, 1.0)
    result = em_fit(data, init, EMOptions(max_iters=50))
    assert result.hit_variance_floor
    assert math.isfinite(result.loglik)
    assert all(c.variance > 0.0 for c in result.model.components)


def test_em_stops_at_max_iters(special7, mom7):
    result = em_fit(special7, mom7, EMOptions(max_iters=3))
    assert result.iters == 3
    assert not result.converged


def test_em_errors(special7):
    with pytest.raises(DomainError):
        em_fit(special7, MixtureModel.univariate(0.5, 0.0, 1.0, 0.0, 1.0))
    with pytest.raises(DimensionError):
        em_fit(Dataset([[0.0, 1.0], [1.0, 0.0]]), MixtureModel.single(0.0, 1.0))
    with pytest.raises(DomainError):
        Dataset([])


def test_density_integrates_to_one(fig1_model):
    xs = np.linspace(0.5, 0.8, 4001)
    total, parts = mixture_density(fig1_model, xs)
    assert parts.shape == (xs.size, 2)
    np.testing.assert_allclose(parts.sum(axis=1), total)
    assert trapezoid(total, xs) == pytest.approx(1.0, abs=1e-6)
    assert trapezoid(parts[:, 0], xs) == pytest.approx(0.414, abs=1e-6)


def test_quantile_init():
    data = Dataset(np.arange(1.0, 10.0))
    model = quantile_init(data)
    lam, mu, nu, sigma2, tau2 = model.univariate_parameters()
    assert lam == 0.5
    assert (mu, nu) == pytest.approx((11 / 3, 19 / 3))
    assert sigma2 == tau2 == pytest.approx(20 / 3)


def test_compare_with_the_moment_fit(special7):
    report = fit_mom(sample_moments(special7, 6))
    result, mom_loglik = compare_mom_em(special7, report)
    assert mom_loglik == pytest.approx(-28.79618895, abs=1e-5)
    assert result.loglik == pytest.approx(-28.43415, abs=1e-3)


def test_compare_falls_back_to_the_quantile_start(rng):
    data = Dataset(rng.normal(size=200))
    report = fit_mom(gaussian_moments_1d(0.0, 1.0, 6))
    result, mom_loglik = compare_mom_em(data, report, EMOptions(max_iters=200))
    assert report.model.k == 1
    assert mom_loglik == pytest.approx(log_likelihood(MixtureModel.single(0.0, 1.0), data))
    assert result.model.k == 2


def test_density_of_the_moment_estimate_is_bimodal(mom7):
    xs = np.linspace(0.0, 9.0, 9001)
    total, _ = mixture_density(mom7, xs)
    peaks = np.nonzero((total[1:-1] > total[:-2]) & (total[1:-1] > total[2:]))[0] + 1
    assert xs[peaks] == pytest.approx([2.32, 5.88], abs=0.02)
