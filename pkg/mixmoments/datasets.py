"""
Synthetic data: the evenly spaced pair design 1, 1.2, 2, 2.2, ..., K, K+0.2 with
its closed-form moments, cumulants and moment estimate, and seeded sampling from
a mixture.
"""
from __future__ import annotations

import logging
import math
from typing import ClassVar, Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .cumulants import CumulantVector
from .errors import DomainError
from .models import MixtureModel
from .moments import Dataset

logger = logging.getLogger(__name__)


class SpecialDataSpec(BaseModel):
    """N = 2K points in pairs (i, i + 0.2), i = 1..K."""

    model_config = ConfigDict(frozen=True)

    OFFSET: ClassVar[float] = 0.2

    K: int = Field(..., ge=2, description="Number of point pairs")

    @property
    def offset(self) -> float:
        return self.OFFSET

    @property
    def N(self) -> int:
        return 2 * self.K

    def points(self) -> np.ndarray:
        base = np.arange(1, self.K + 1, dtype=float)
        return np.column_stack([base, base + self.OFFSET]).ravel()

    @property
    def mean(self) -> float:
        return self.K / 2 + 0.6

    def central_moments(self) -> Dict[int, float]:
        """Even central moments m2, m4, m6 (the odd ones vanish by symmetry)."""
        K = self.K
        return {
            2: K**2 / 12 - 11 / 150,
            4: K**4 / 80 - 11 * K**2 / 300 + 91 / 3750,
            6: K**6 / 448 - 11 * K**4 / 800 + 91 * K**2 / 3000 - 12347 / 656250,
        }

    def cumulants(self) -> CumulantVector:
        """k0..k6 with k1 = K/2 + 0.6 and all odd cumulants above order 1 equal to zero."""
        K = self.K
        return CumulantVector.from_sequence(
            [
                0.0,
                self.mean,
                K**2 / 12 - 11 / 150,
                0.0,
                -(K**4) / 120 + 61 / 7500,
                0.0,
                K**6 / 252 - 7781 / 1968750,
            ]
        )

    def mom_estimate(self) -> MixtureModel:
        """The moment estimate: equal weights and variances, means m1 -/+ (-k4/2)^(1/4)."""
        k = self.cumulants()
        half_k4 = -k[4] / 2
        spread = half_k4**0.25
        variance = k[2] - math.sqrt(half_k4)
        return MixtureModel.univariate(0.5, self.mean - spread, self.mean + spread, variance, variance)


def _spec(K: int) -> SpecialDataSpec:
    if K < 2:
        raise DomainError(f"the special design needs K >= 2, got {K}")
    return SpecialDataSpec(K=K)


def special_data(K: int) -> Dataset:
    """The 2K sorted points 1, 1.2, 2, 2.2, ..., K, K+0.2."""
    spec = _spec(K)
    return Dataset(spec.points(), label=f"special design K={K}")


def special_cumulants(K: int) -> CumulantVector:
    return _spec(K).cumulants()


def sample_mixture(model: MixtureModel, N: int, seed: int) -> Dataset:
    """N independent draws: a component by weight, then a Gaussian draw from it.

    The generator is numpy's default PCG64 seeded with seed; the label records both.
    """
    if N < 1:
        raise DomainError(f"sample size must be at least 1, got {N}")
    rng = np.random.default_rng(seed)
    labels = rng.choice(model.k, size=N, p=np.array(model.weights) / math.fsum(model.weights))
    rows = np.empty((N, model.n))
    for j, comp in enumerate(model.components):
        chosen = labels == j
        count = int(chosen.sum())
        if not count:
            continue
        if model.n == 1:
            rows[chosen, 0] = rng.normal(comp.mean[0], math.sqrt(comp.variance), size=count)
        else:
            rows[chosen] = rng.multivariate_normal(comp.mean_array(), comp.covariance_array(), size=count)
    label = f"sample_mixture PCG64 seed={seed} N={N}"
    logger.debug(f"Drew {label} from a {model.k}-component mixture")
    return Dataset(rows, label=label)
