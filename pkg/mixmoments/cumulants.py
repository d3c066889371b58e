"""Moment <-> cumulant conversion in any dimension: K = log M, M = exp K."""
from __future__ import annotations

import logging

import numpy as np

from .errors import DomainError, PreconditionError
from .models import GaussianComponent
from .moments import Dataset, GradedVector, MomentVector, gaussian_cumulant_cube, sample_moments
from .series import from_exponential_values, series_exp, series_log, to_exponential_values

logger = logging.getLogger(__name__)


class CumulantVector(GradedVector):
    """Cumulants k_i of order <= d; k_0 is always 0."""

    __slots__ = ()
    kind = "cumulant"

    def _validate(self, cube: np.ndarray) -> np.ndarray:
        k0 = float(cube[(0,) * cube.ndim])
        if k0 != 0.0:
            raise PreconditionError(f"k0 must be 0, got {k0!r}")
        return cube


def moments_to_cumulants(m: MomentVector) -> CumulantVector:
    """Cumulants as i! times the coefficients of log(sum_i m_i t^i / i!)."""
    m0 = float(m.values[(0,) * m.n])
    if m0 <= 0.0:
        raise DomainError(f"m0 must be positive, got {m0!r}")
    mgf = from_exponential_values(m.n, m.d, m.values / m0)
    k = to_exponential_values(series_log(mgf))
    k[(0,) * m.n] = 0.0
    return CumulantVector(m.n, m.d, k)


def cumulants_to_moments(k: CumulantVector) -> MomentVector:
    """Moments as i! times the coefficients of exp(sum_i k_i t^i / i!)."""
    k0 = float(k.values[(0,) * k.n])
    if k0 != 0.0:
        raise PreconditionError(f"k0 must be 0, got {k0!r}")
    log_mgf = from_exponential_values(k.n, k.d, k.values)
    return MomentVector(k.n, k.d, to_exponential_values(series_exp(log_mgf)))


def gaussian_cumulants_nd(comp: GaussianComponent, d: int) -> CumulantVector:
    """Cumulants of a Gaussian: the mean, the covariance, and zeros above order 2."""
    if d < 0:
        raise DomainError(f"order must be non-negative, got {d}")
    return CumulantVector(comp.n, d, gaussian_cumulant_cube(comp, d))


def sample_cumulants(data: Dataset, d: int) -> CumulantVector:
    return moments_to_cumulants(sample_moments(data, d))
