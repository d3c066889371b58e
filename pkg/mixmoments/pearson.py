"""
Method of moments for a mixture of two univariate Gaussians.

The product p of the normalized means (means minus the overall mean) is a root
of a degree-9 polynomial in the cumulants k3, k4, k5. Every real non-positive
root gives a candidate: p < 0 recovers the sum s of the normalized means and
then all five parameters; p = 0 is the equal-means branch, which needs k6.
Candidates are ranked by how well they reproduce the sixth moment.
"""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cumulants import CumulantVector, moments_to_cumulants
from .em import log_likelihood
from .equations import (
    e1_terms,
    e2_terms,
    e3_terms,
    evaluate,
    pearson_coefficients,
    s_denominator_terms,
    s_numerator,
)
from .errors import CandidateRejected, DimensionError, DomainError
from .models import FitReport, PearsonCandidate, RejectReason, SelectionRule
from .moments import Dataset, GradedVector, MomentVector, mixture_moments
from .rootfind import DEFAULT_CLUSTER_TOL, UnivariatePolynomial, real_roots

logger = logging.getLogger(__name__)

DENOMINATOR_TOL = 1e-10
DISCRIMINANT_TOL = 1e-9
LAMBDA_SLACK = 1e-9
VARIANCE_SLACK = 1e-10
VARIANCE_ERROR_CAP = 1e-6
P_ZERO_TOL = 1e-9
CUMULANT_SNAP_TOL = 1e-10
VANISH_TOL = 1e-8
TIE_TOL = 1e-12

CumulantsLike = Union[CumulantVector, Sequence[float]]


def _sequence(k: CumulantsLike, order: int) -> List[float]:
    values = k.sequence() if isinstance(k, GradedVector) else [float(v) for v in k]
    if len(values) <= order:
        raise DomainError(f"cumulants through order {order} are required, got order {len(values) - 1}")
    return values


def _weight_scale(p: float, ks: Sequence[float]) -> float:
    """Magnitude of one unit of 'length' implied by p (weight 2) and k_r (weight r)."""
    parts = [abs(p) ** 0.5] + [abs(ks[r]) ** (1.0 / r) for r in range(2, min(len(ks), 6))]
    scale = max(parts)
    return scale if scale > 0.0 else 1.0


# ------------------------------------------------------------------
# Building blocks
# ------------------------------------------------------------------
def pearson_nonic(k3: float, k4: float, k5: float) -> UnivariatePolynomial:
    """The degree-9 polynomial whose roots include p = (mu - m1)(nu - m1)."""
    return UnivariatePolynomial(pearson_coefficients(k3, k4, k5))


def recover_s(p: float, k: CumulantsLike) -> float:
    """Sum of the normalized means for a negative root p.

    Uses the rational expression for s when its denominator is safely nonzero,
    otherwise the real root of the quadratic relation E1 that best satisfies E2.

    Raises:
        DomainError: If p is not negative or cumulants stop below order 5.
        CandidateRejected: If E1 has no real root (reason s_nonreal).
    """
    if not p < 0.0:
        raise DomainError(f"recover_s needs p < 0, got {p!r}")
    ks = _sequence(k, 5)
    scale = _weight_scale(p, ks)

    denominator = float(s_denominator_terms(p, ks).sum())
    if abs(denominator) > DENOMINATOR_TOL * scale**9:
        return -s_numerator(p, ks) / denominator

    k3, k4 = ks[3], ks[4]
    a = -2.0 * p**2
    b = -4.0 * p * k3
    c = 6.0 * p**3 + 3.0 * k4 * p + k3**2
    discriminant = b * b - 4.0 * a * c
    size = max(b * b, 4.0 * abs(a) * (abs(6.0 * p**3) + abs(3.0 * k4 * p) + k3**2))
    if discriminant < -DISCRIMINANT_TOL * size:
        raise CandidateRejected(RejectReason.S_NONREAL, f"E1 has no real root at p={p!r}")
    root = math.sqrt(max(discriminant, 0.0))
    options = [(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)]
    return min(options, key=lambda s: abs(float(e2_terms(p, s, ks).sum())))


def _newton_step(p: float, s: float, ks: Sequence[float]) -> Optional[Tuple[float, float]]:
    """(dp, ds) solving E1 = E2 = 0 to first order at (p, s), or None if the Jacobian is singular."""
    k3, k4, k5 = ks[3], ks[4], ks[5]
    residual = np.array([e1_terms(p, s, ks).sum(), e2_terms(p, s, ks).sum()])
    jacobian = np.array(
        [
            [-4 * p * s**2 - 4 * s * k3 + 18 * p**2 + 3 * k4, -4 * p**2 * s - 4 * p * k3],
            [-4 * p * s**3 + 12 * p**2 * s - 40 * p * k3 + 3 * k5, -6 * p**2 * s**2 + 4 * p**3 + 5 * k3**2],
        ]
    )
    try:
        dp, ds = np.linalg.solve(jacobian, -residual)
    except np.linalg.LinAlgError:
        return None
    if not (math.isfinite(dp) and math.isfinite(ds)):
        return None
    return float(dp), float(ds)


def refine_ps(p: float, s: float, k: CumulantsLike, steps: int = 4) -> Tuple[float, float]:
    """Newton steps on E1 = E2 = 0 from (p, s), kept while the relative residual drops and p stays negative."""
    ks = _sequence(k, 5)

    def residual(p_: float, s_: float) -> float:
        return evaluate(e1_terms, p_, s_, ks, relative=True) + evaluate(e2_terms, p_, s_, ks, relative=True)

    best = residual(p, s)
    for _ in range(steps):
        if best == 0.0:
            break
        step = _newton_step(p, s, ks)
        if step is None:
            break
        p_new, s_new = p + step[0], s + step[1]
        if not p_new < 0.0:
            break
        value = residual(p_new, s_new)
        if not value < best:
            break
        p, s, best = p_new, s_new, value
    return p, s


def _variance_error(p: float, s: float, ks: Sequence[float], mu_c: float, nu_c: float, R2: float) -> float:
    """First-order error of the recovered variances implied by the remaining Newton correction."""
    if len(ks) <= 5:
        return 0.0
    step = _newton_step(p, s, ks)
    if step is None:
        return 0.0
    dp, ds = abs(step[0]), abs(step[1])
    spread = max(abs(mu_c), abs(nu_c))
    gap = abs(mu_c - nu_c)
    return 4.0 * ((spread + abs(R2)) * ds + (1.0 + abs(R2) / gap + abs(ks[3]) * spread / (3.0 * p * p)) * dp)


def candidate_from_ps(p: float, s: float, m1: float, k: CumulantsLike) -> PearsonCandidate:
    """All five parameters from the normalized-mean invariants (p, s)."""
    ks = _sequence(k, 3)
    k2, k3 = ks[2], ks[3]
    scale = _weight_scale(p, ks)
    variance_scale = k2 if k2 > 0.0 else scale**2

    if abs(p) < 1e-12 * scale**2:
        return PearsonCandidate(p=p, s=s, valid=False, reject_reason=RejectReason.DEGENERATE_DENOMINATOR)

    discriminant = s * s - 4.0 * p
    if discriminant < 0.0:
        if discriminant < -1e-12 * max(s * s, 4.0 * abs(p)):
            raise DomainError(f"normalized means are not real for p={p!r}, s={s!r}")
        discriminant = 0.0
    root = math.sqrt(discriminant)
    if s == 0.0:
        mu_c, nu_c = -root / 2.0, root / 2.0
    else:
        big = (s + math.copysign(root, s)) / 2.0
        mu_c, nu_c = sorted((big, p / big))
    delta = mu_c - nu_c
    if delta == 0.0:
        return PearsonCandidate(p=p, s=s, valid=False, reject_reason=RejectReason.DEGENERATE_DENOMINATOR)

    lam = -nu_c / delta
    R1 = -k2 - p
    R2 = -s / 3.0 - k3 / (3.0 * p)
    sigma2 = R2 * mu_c - R1
    tau2 = R2 * nu_c - R1

    slack = VARIANCE_SLACK * variance_scale + min(
        _variance_error(p, s, ks, mu_c, nu_c, R2), VARIANCE_ERROR_CAP * variance_scale
    )
    reason: Optional[RejectReason] = None
    if not -LAMBDA_SLACK < lam < 1.0 + LAMBDA_SLACK:
        reason = RejectReason.LAMBDA_OUT_OF_RANGE
    elif min(sigma2, tau2) < -slack:
        reason = RejectReason.VARIANCE_NEGATIVE
    else:
        lam = min(max(lam, 0.0), 1.0)
        sigma2, tau2 = max(sigma2, 0.0), max(tau2, 0.0)

    return PearsonCandidate(
        branch="pearson",
        p=p,
        s=s,
        R1=R1,
        R2=R2,
        lam=lam,
        mu=mu_c + m1,
        nu=nu_c + m1,
        sigma2=sigma2,
        tau2=tau2,
        valid=reason is None,
        reject_reason=reason,
    )


def equal_means_fit(k: CumulantsLike, m1: float) -> PearsonCandidate:
    """Equal-means model from k2, k4, k6: sigma2 + tau2 = B, sigma2 * tau2 = C."""
    ks = _sequence(k, 6)
    k2, k4, k6 = ks[2], ks[4], ks[6]
    base = dict(branch="equal_means", p=0.0, s=0.0)

    if abs(k4) <= 1e-10 * k2**2 or k4 == 0.0:
        return PearsonCandidate(**base, valid=False, reject_reason=RejectReason.DEGENERATE_DENOMINATOR)

    B = (10.0 * k2 * k4 + k6) / (5.0 * k4)
    C = (3.0 * k2 * k6 + 15.0 * k2**2 * k4 - 5.0 * k4**2) / (15.0 * k4)
    discriminant = B * B - 4.0 * C
    if discriminant < -DISCRIMINANT_TOL * max(B * B, 4.0 * abs(C)):
        logger.debug(f"equal_means_fit: complex variances (B={B!r}, C={C!r})")
        return PearsonCandidate(**base, valid=False, reject_reason=RejectReason.VARIANCE_NEGATIVE)
    root = math.sqrt(max(discriminant, 0.0))
    sigma2, tau2 = (B - root) / 2.0, (B + root) / 2.0
    variance_scale = abs(k2) if k2 != 0.0 else 1.0
    if sigma2 < -VARIANCE_SLACK * variance_scale:
        return PearsonCandidate(
            **base, mu=m1, nu=m1, sigma2=sigma2, tau2=tau2,
            valid=False, reject_reason=RejectReason.VARIANCE_NEGATIVE,
        )
    if sigma2 == tau2:
        return PearsonCandidate(**base, valid=False, reject_reason=RejectReason.DEGENERATE_DENOMINATOR)

    lam = (k2 - tau2) / (sigma2 - tau2)
    if not -LAMBDA_SLACK < lam < 1.0 + LAMBDA_SLACK:
        return PearsonCandidate(
            **base, lam=lam, mu=m1, nu=m1, sigma2=sigma2, tau2=tau2,
            valid=False, reject_reason=RejectReason.LAMBDA_OUT_OF_RANGE,
        )
    return PearsonCandidate(
        **base,
        lam=min(max(lam, 0.0), 1.0),
        mu=m1,
        nu=m1,
        sigma2=max(sigma2, 0.0),
        tau2=tau2,
        valid=True,
    )


# ------------------------------------------------------------------
# Pipeline
# ------------------------------------------------------------------
def _unstandardize(candidate: PearsonCandidate, c: float, m1: float) -> PearsonCandidate:
    def scaled(value: Optional[float], power: int) -> Optional[float]:
        return None if value is None else value * c**power

    def shifted(value: Optional[float]) -> Optional[float]:
        return None if value is None else value * c + m1

    return candidate.model_copy(
        update={
            "p": candidate.p * c**2,
            "s": scaled(candidate.s, 1),
            "R1": scaled(candidate.R1, 2),
            "R2": scaled(candidate.R2, 1),
            "mu": shifted(candidate.mu),
            "nu": shifted(candidate.nu),
            "sigma2": scaled(candidate.sigma2, 2),
            "tau2": scaled(candidate.tau2, 2),
        }
    )


def _branch_candidate(p: float, kappa: List[float], has_sixth: bool, p_zero_tol: float) -> PearsonCandidate:
    if p > p_zero_tol:
        return PearsonCandidate(p=p, valid=False, reject_reason=RejectReason.P_POSITIVE)
    if p >= -p_zero_tol:
        if has_sixth:
            return equal_means_fit(kappa, 0.0)
        return PearsonCandidate(
            branch="equal_means", p=0.0, s=0.0, valid=False,
            reject_reason=RejectReason.DEGENERATE_DENOMINATOR,
        )
    try:
        s = recover_s(p, kappa)
    except CandidateRejected as rejected:
        return PearsonCandidate(p=p, valid=False, reject_reason=rejected.reason)
    p, s = refine_ps(p, s, kappa)
    return candidate_from_ps(p, s, 0.0, kappa)


def _pick(indices: List[int], score: Dict[int, float], candidates: List[PearsonCandidate], scale: float):
    """Index with the smallest score; near-ties go to the smallest |p|."""
    best = min(score[i] for i in indices)
    tied = [i for i in indices if score[i] <= best + TIE_TOL * scale]
    chosen = min(tied, key=lambda i: (abs(candidates[i].p), i))
    return chosen, len(tied) > 1


def fit_mom(
    m: MomentVector,
    select: SelectionRule = SelectionRule.M6_GAP,
    data: Optional[Dataset] = None,
    *,
    root_tol: float = DEFAULT_CLUSTER_TOL,
    p_zero_tol: float = P_ZERO_TOL,
    snap_tol: float = CUMULANT_SNAP_TOL,
    vanish_tol: float = VANISH_TOL,
) -> FitReport:
    """Fit a two-component univariate Gaussian mixture to moments of order >= 5.

    Args:
        m: Univariate moment vector, d >= 5 (d >= 6 for m6 ranking and the
            equal-means branch).
        select: m6_gap (default) or likelihood, which needs the raw data.
        data: Sample the moments came from; only read by the likelihood rule.
        root_tol: Clustering tolerance of the nonic's real roots.
        p_zero_tol: Standardized |p| treated as the equal-means branch.
        snap_tol: Standardized cumulants below this are treated as zero.
        vanish_tol: Standardized cumulants below this allow the single
            Gaussian fallback.

    Returns:
        FitReport with every candidate, the selection and diagnostics.

    Raises:
        DimensionError: If m is not univariate.
        DomainError: If d < 5 or the likelihood rule has no data.
    """
    if m.n != 1:
        raise DimensionError(f"fit_mom needs univariate moments, got n={m.n}")
    if m.d < 5:
        raise DomainError(f"fit_mom needs moments through order 5, got order {m.d}")
    if select == SelectionRule.SINGLE_GAUSSIAN_FALLBACK:
        raise DomainError("single_gaussian_fallback is an outcome, not a selection rule")
    if select == SelectionRule.LIKELIHOOD and data is None:
        raise DomainError("likelihood selection needs the raw dataset")

    k = moments_to_cumulants(m)
    ks = k.sequence()
    m1, k2 = ks[1], ks[2]
    top = min(m.d, 6)
    has_sixth = top >= 6

    c = math.sqrt(k2) if k2 > 0.0 else 1.0
    kappa = [0.0, 0.0, k2 / c**2] + [ks[r] / c**r for r in range(3, top + 1)]
    for r in range(3, top + 1):
        if abs(kappa[r]) <= snap_tol:
            kappa[r] = 0.0

    diagnostics: Dict[str, object] = {"order": m.d, "mean": m1, "standardization_scale": c}
    candidates: List[PearsonCandidate] = []
    if k2 > 0.0:
        nonic = pearson_nonic(kappa[3], kappa[4], kappa[5])
        if not nonic.is_zero():
            roots = real_roots(nonic, tol=root_tol)
            diagnostics["nonic_roots"] = [[r.value, r.multiplicity] for r in roots.roots]
            for root in roots.roots:
                candidate = _branch_candidate(root.value, kappa, has_sixth, p_zero_tol)
                candidates.append(_unstandardize(candidate, c, m1))

    m6 = m[6] if has_sixth else None
    scored: List[PearsonCandidate] = []
    for candidate in candidates:
        if candidate.valid:
            m6_model = mixture_moments(candidate.to_mixture(), 6)[6]
            update = {"m6_model": m6_model}
            if m6 is not None:
                update["m6_gap"] = abs(m6_model - m6)
            if select == SelectionRule.LIKELIHOOD:
                try:
                    update["log_likelihood"] = log_likelihood(candidate.to_mixture(), data)
                except DomainError:
                    update["log_likelihood"] = None
            candidate = candidate.model_copy(update=update)
        scored.append(candidate)
    candidates = sorted(scored, key=lambda cand: (cand.p, math.inf if cand.s is None else cand.s))

    valid = [i for i, cand in enumerate(candidates) if cand.valid]
    selected: Optional[int] = None
    rule = select
    tie = False
    if select == SelectionRule.LIKELIHOOD:
        finite = [i for i in valid if candidates[i].log_likelihood is not None]
        if finite:
            score = {i: -candidates[i].log_likelihood for i in finite}
            selected, tie = _pick(finite, score, candidates, max(abs(min(score.values())), 1.0))
    elif has_sixth and valid:
        score = {i: candidates[i].m6_gap for i in valid}
        selected, tie = _pick(valid, score, candidates, max(abs(m6), 1.0))
    elif len(valid) == 1:
        selected = valid[0]
    elif valid:
        diagnostics["note"] = "order 5 input: valid candidates are not ranked"

    if not valid and all(abs(kappa[r]) <= vanish_tol for r in range(3, top + 1)):
        variance = max(k2, 0.0)
        fallback = PearsonCandidate(
            branch="single_gaussian", p=0.0, s=0.0, lam=1.0, mu=m1, nu=m1,
            sigma2=variance, tau2=variance, valid=True,
        )
        m6_model = mixture_moments(fallback.to_mixture(), 6)[6]
        fallback = fallback.model_copy(
            update={"m6_model": m6_model, "m6_gap": None if m6 is None else abs(m6_model - m6)}
        )
        candidates.append(fallback)
        selected = len(candidates) - 1
        rule = SelectionRule.SINGLE_GAUSSIAN_FALLBACK
        logger.warning(f"No two-component candidate; all cumulants vanish, returning N({m1:.6g}, {variance:.6g})")

    if tie:
        logger.warning("Selection criterion tied between candidates; chose the smallest |p|")
    diagnostics["tie_break"] = tie

    if selected is not None and rule != SelectionRule.SINGLE_GAUSSIAN_FALLBACK:
        chosen = candidates[selected]
        p_std = chosen.p / c**2
        s_std = (chosen.s or 0.0) / c
        diagnostics["E1"] = evaluate(e1_terms, p_std, s_std, kappa, relative=True)
        diagnostics["E2"] = evaluate(e2_terms, p_std, s_std, kappa, relative=True)
        if has_sixth:
            diagnostics["E3"] = evaluate(e3_terms, p_std, s_std, kappa, relative=True)

    logger.info(
        f"fit_mom: {len(valid)} valid of {len(candidates)} candidate(s), "
        f"selected={selected}, rule={rule.value}"
    )
    return FitReport(
        input_moments=m.to_document(),
        cumulants=k.to_document(),
        candidates=candidates,
        selected=selected,
        selection_rule=rule,
        diagnostics=diagnostics,
    )
