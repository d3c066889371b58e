import math

import numpy as np
import pytest
from pydantic import ValidationError

from mixmoments.cumulants import sample_cumulants
from mixmoments.datasets import SpecialDataSpec, sample_mixture, special_cumulants, special_data
from mixmoments.errors import DomainError
from mixmoments.models import GaussianComponent, MixtureModel
from mixmoments.moments import mixture_moments, sample_moments
from mixmoments.pearson import fit_mom


def test_points_of_the_special_design():
    data = special_data(3)
    np.testing.assert_allclose(data.column(), [1.0, 1.2, 2.0, 2.2, 3.0, 3.2])
    assert len(data) == SpecialDataSpec(K=3).N == 6
    assert data.label == "special design K=3"


@pytest.mark.parametrize("K", range(2, 21))
def test_closed_forms_match_the_plug_in_estimates(K):
    spec = SpecialDataSpec(K=K)
    data = special_data(K)
    central = sample_moments(data, 6, centered=True)
    for order, value in spec.central_moments().items():
        assert central[order] == pytest.approx(value, rel=1e-9)
    for order in (1, 3, 5):
        assert abs(central[order]) <= 1e-12 * max(1.0, spec.central_moments()[6])

    plug_in = sample_cumulants(data, 6).sequence()
    closed = special_cumulants(K).sequence()
    assert closed[1] == pytest.approx(plug_in[1], rel=1e-12)
    for order in (2, 4, 6):
        assert closed[order] == pytest.approx(plug_in[order], rel=1e-9)
    for order in (3, 5):
        assert closed[order] == 0.0
        assert abs(plug_in[order]) <= 1e-9 * abs(plug_in[order + 1])


def test_seven_pair_cumulants():
    k = special_cumulants(7)
    assert k[1] == pytest.approx(4.1)
    assert k[2] == pytest.approx(4.01)
    assert k[4] == pytest.approx(-20.0002)
    assert k[6] == pytest.approx(466.857, abs=1e-3)


def test_moment_estimate_of_the_special_design():
    lam, mu, nu, sigma2, tau2 = SpecialDataSpec(K=7).mom_estimate().univariate_parameters()
    assert lam == 0.5
    assert mu + nu == pytest.approx(8.2)
    assert nu - mu == pytest.approx(2 * 10.0001**0.25)
    assert sigma2 == tau2 == pytest.approx(4.01 - math.sqrt(10.0001))


def test_the_design_needs_two_pairs():
    with pytest.raises(DomainError):
        special_data(1)
    with pytest.raises(DomainError):
        special_cumulants(0)
    with pytest.raises(ValidationError):
        SpecialDataSpec(K=1)


def test_sampling_is_deterministic(fig1_model):
    first = sample_mixture(fig1_model, 500, seed=11)
    again = sample_mixture(fig1_model, 500, seed=11)
    other = sample_mixture(fig1_model, 500, seed=12)
    np.testing.assert_array_equal(first.rows, again.rows)
    assert not np.array_equal(first.rows, other.rows)
    assert first.label == "sample_mixture PCG64 seed=11 N=500"


def test_sampling_a_bivariate_mixture():
    model = MixtureModel(
        weights=[0.5, 0.5],
        components=[
            GaussianComponent(mean=[0.0, 0.0], covariance=[[1.0, 0.0], [0.0, 1.0]]),
            GaussianComponent(mean=[3.0, -3.0], covariance=[[0.5, 0.2], [0.2, 0.5]]),
        ],
    )
    data = sample_mixture(model, 100, seed=3)
    assert data.rows.shape == (100, 2)


def test_sampling_needs_a_positive_size(fig1_model):
    with pytest.raises(DomainError):
        sample_mixture(fig1_model, 0, seed=1)


def test_sample_second_moment(fig1_model):
    data = sample_mixture(fig1_model, 10**6, seed=2024)
    assert sample_moments(data, 2)[2] == pytest.approx(mixture_moments(fig1_model, 2)[2], rel=1e-3)


@pytest.mark.slow
def test_moment_fit_of_a_large_crab_sample(fig1_model):
    data = sample_mixture(fig1_model, 10**6, seed=1894)
    report = fit_mom(sample_moments(data, 6))
    assert report.selected is not None
    lam, mu, nu, sigma2, tau2 = report.model.univariate_parameters()
    assert (mu, nu) == pytest.approx((0.633, 0.657), rel=5e-2)
    assert lam == pytest.approx(0.414, abs=0.1)
    assert (math.sqrt(sigma2), math.sqrt(tau2)) == pytest.approx((0.018, 0.012), rel=0.25)
