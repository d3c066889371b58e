"""
Maximum-likelihood baseline for univariate Gaussian mixtures: log-likelihood,
EM iteration and mixture densities.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .errors import DimensionError, DomainError
from .models import EMOptions, EMResult, FitReport, GaussianComponent, MixtureModel
from .moments import Dataset

logger = logging.getLogger(__name__)


def _univariate_arrays(model: MixtureModel) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if model.n != 1:
        raise DimensionError(f"expected a univariate mixture, got n={model.n}")
    weights = np.array(model.weights, dtype=float)
    means = np.array([c.mean[0] for c in model.components])
    variances = np.array([c.variance for c in model.components])
    return weights, means, variances


def _component_log_densities(x: np.ndarray, weights, means, variances) -> np.ndarray:
    """(N, k) array of log(w_j) + log N(x_i; mean_j, var_j)."""
    with np.errstate(divide="ignore"):
        log_weights = np.log(weights)
    return log_weights[None, :] + norm.logpdf(x[:, None], loc=means[None, :], scale=np.sqrt(variances)[None, :])


def _check_variances(variances: np.ndarray) -> None:
    if np.any(variances <= 0.0):
        raise DomainError(f"variances must be positive, got {variances.tolist()}")


def log_likelihood(model: MixtureModel, data: Dataset) -> float:
    """Sum over the sample of log(sum_j w_j N(x; mean_j, var_j))."""
    if data.n != 1:
        raise DimensionError(f"expected univariate data, got n={data.n}")
    weights, means, variances = _univariate_arrays(model)
    _check_variances(variances)
    log_dens = _component_log_densities(data.column(), weights, means, variances)
    return float(logsumexp(log_dens, axis=1).sum())


def mixture_density(model: MixtureModel, xs: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Total density at xs and the weighted density of each component, shape (len(xs), k)."""
    weights, means, variances = _univariate_arrays(model)
    _check_variances(variances)
    xs = np.asarray(xs, dtype=float)
    parts = weights[None, :] * norm.pdf(xs[:, None], loc=means[None, :], scale=np.sqrt(variances)[None, :])
    return parts.sum(axis=1), parts


def quantile_init(data: Dataset, k: int = 2) -> MixtureModel:
    """Equal weights, means at interior quantiles, every variance equal to the sample variance."""
    x = data.column()
    means = np.quantile(x, np.linspace(0.0, 1.0, k + 2)[1:-1])
    variance = float(x.var()) or 1.0
    return MixtureModel(
        weights=[1.0 / k] * k,
        components=[GaussianComponent.univariate(mu, variance) for mu in means],
    )


def em_fit(data: Dataset, init: MixtureModel, opts: Optional[EMOptions] = None) -> EMResult:
    """Run EM from init until the log-likelihood gain drops below opts.loglik_tol.

    Variances are kept at or above opts.variance_floor times the sample variance.

    Args:
        data: Univariate sample.
        init: Starting mixture with positive variances.
        opts: Iteration controls; defaults to EMOptions().

    Returns:
        EMResult with the final model and log-likelihood.

    Raises:
        DimensionError: If data or init are not univariate.
        DomainError: If an initial variance is not positive.
    """
    opts = opts or EMOptions()
    if data.n != 1:
        raise DimensionError(f"expected univariate data, got n={data.n}")
    x = data.column()
    count = x.size
    weights, means, variances = _univariate_arrays(init)
    _check_variances(variances)
    floor = opts.variance_floor * (float(x.var()) or 1.0)

    log_dens = _component_log_densities(x, weights, means, variances)
    point_ll = logsumexp(log_dens, axis=1)
    loglik = float(point_ll.sum())
    trace: List[float] = [loglik]
    converged = False
    hit_floor = False
    iters = 0

    for iters in range(1, opts.max_iters + 1):
        # E-step
        resp = np.exp(log_dens - point_ll[:, None])
        totals = resp.sum(axis=0)

        # M-step; an empty component keeps its mean and variance
        alive = totals > 0.0
        new_means = means.copy()
        new_variances = variances.copy()
        new_means[alive] = (resp[:, alive] * x[:, None]).sum(axis=0) / totals[alive]
        centred = x[:, None] - new_means[None, :]
        new_variances[alive] = (resp[:, alive] * centred[:, alive] ** 2).sum(axis=0) / totals[alive]
        if np.any(new_variances < floor) or (floor == 0.0 and np.any(new_variances == 0.0)):
            hit_floor = True
            new_variances = np.maximum(new_variances, floor)
            if floor == 0.0:
                break
        new_weights = totals / count
        new_weights = new_weights / new_weights.sum()

        weights, means, variances = new_weights, new_means, new_variances
        log_dens = _component_log_densities(x, weights, means, variances)
        point_ll = logsumexp(log_dens, axis=1)
        new_loglik = float(point_ll.sum())
        if opts.record_trace:
            trace.append(new_loglik)
        gain = abs(new_loglik - loglik)
        loglik = new_loglik
        if gain < opts.loglik_tol:
            converged = True
            break

    if hit_floor:
        logger.warning(f"EM hit the variance floor {floor:.3g}; the likelihood is unbounded along this path")
    if converged:
        logger.info(f"EM converged after {iters} iteration(s), loglik={loglik:.10g}")
    else:
        logger.warning(f"EM stopped after {iters} iteration(s) without converging, loglik={loglik:.10g}")

    model = MixtureModel(
        weights=[float(w) for w in weights],
        components=[GaussianComponent.univariate(float(mu), float(v)) for mu, v in zip(means, variances)],
    )
    return EMResult(
        model=model,
        loglik=loglik,
        iters=iters,
        converged=converged,
        trace=trace if opts.record_trace else None,
        hit_variance_floor=hit_floor,
    )


def _em_ready(model: Optional[MixtureModel]) -> bool:
    return model is not None and model.k == 2 and all(c.variance > 0.0 for c in model.components)


def compare_mom_em(
    data: Dataset, report: FitReport, opts: Optional[EMOptions] = None
) -> Tuple[EMResult, Optional[float]]:
    """EM started at the moment estimate (or the quantile start), and the estimate's own log-likelihood."""
    model = report.model
    mom_loglik = None
    if model is not None and all(c.variance > 0.0 for c in model.components):
        mom_loglik = log_likelihood(model, data)
    if _em_ready(model):
        init = model
    else:
        logger.info("Moment estimate unusable as an EM start; using the quantile start")
        init = quantile_init(data)
    return em_fit(data, init, opts), mom_loglik
