import numpy as np
import pytest

from mixmoments.datasets import special_data
from mixmoments.models import MixtureModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig1_model():
    """Crab-data parameters: lambda=0.414, mu=0.633, sigma=0.018, nu=0.657, tau=0.012."""
    return MixtureModel.univariate(0.414, 0.633, 0.657, 0.018**2, 0.012**2)


@pytest.fixture
def special7():
    return special_data(7)


@pytest.fixture
def draw_mixture():
    """Callable drawing a well-separated two-component univariate mixture."""

    def _draw(rng, lam_range=(0.1, 0.9)):
        lam = rng.uniform(*lam_range)
        sigma2, tau2 = rng.uniform(0.25, 4.0, size=2)
        mu = rng.uniform(-3.0, 3.0)
        gap = rng.uniform(0.5, 3.0) * max(np.sqrt(sigma2), np.sqrt(tau2))
        nu = mu + gap
        return MixtureModel.univariate(lam, mu, nu, sigma2, tau2)

    return _draw
