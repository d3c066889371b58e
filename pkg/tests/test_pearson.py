import math

import numpy as np
import pytest

from mixmoments.cumulants import moments_to_cumulants
from mixmoments.datasets import SpecialDataSpec, special_cumulants
from mixmoments.em import log_likelihood
from mixmoments.errors import CandidateRejected, DimensionError, DomainError
from mixmoments.models import GaussianComponent, MixtureModel, RejectReason, SelectionRule
from mixmoments.moments import MomentVector, gaussian_moments_1d, mixture_moments, sample_moments
from mixmoments.pearson import candidate_from_ps, equal_means_fit, fit_mom, recover_s, refine_ps


def _centered(model: MixtureModel) -> MixtureModel:
    lam, mu, nu, sigma2, tau2 = model.univariate_parameters()
    m1 = lam * mu + (1 - lam) * nu
    return MixtureModel.univariate(lam, mu - m1, nu - m1, sigma2, tau2)


def _parameters(report):
    return report.selected_candidate.to_mixture().univariate_parameters()


# ------------------------------------------------------------------
# Building blocks
# ------------------------------------------------------------------
def test_recover_s_on_random_mixtures(rng, draw_mixture):
    for _ in range(100):
        model = _centered(draw_mixture(rng, lam_range=(0.1, 0.4)))
        lam, mu, nu, _, _ = model.univariate_parameters()
        k = moments_to_cumulants(mixture_moments(model, 5))
        assert recover_s(mu * nu, k) == pytest.approx(mu + nu, rel=1e-5, abs=1e-7)


def test_recover_s_falls_back_to_the_quadratic_for_symmetric_input():
    assert recover_s(-1.0, [0.0, 0.0, 1.0, 0.0, -2.0, 0.0]) == 0.0


def test_recover_s_rejects_nonreal_sums():
    kappa4 = -2.0
    p = -math.sqrt(-1.5 * kappa4)
    with pytest.raises(CandidateRejected) as caught:
        recover_s(p, [0.0, 0.0, 1.0, 0.0, kappa4, 0.0])
    assert caught.value.reason == RejectReason.S_NONREAL


def test_recover_s_argument_errors():
    with pytest.raises(DomainError):
        recover_s(0.5, [0.0, 0.0, 1.0, 0.0, -2.0, 0.0])
    with pytest.raises(DomainError):
        recover_s(-1.0, [0.0, 0.0, 1.0, 0.0])


def test_candidate_from_symmetric_point_masses():
    candidate = candidate_from_ps(-1.0, 0.0, 0.0, [0.0, 0.0, 1.0, 0.0])
    assert candidate.valid
    assert (candidate.lam, candidate.mu, candidate.nu) == pytest.approx((0.5, -1.0, 1.0))
    assert (candidate.sigma2, candidate.tau2) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_candidate_for_the_special_design():
    spec = SpecialDataSpec(K=7)
    k = spec.cumulants()
    half = -k[4] / 2
    candidate = candidate_from_ps(-math.sqrt(half), 0.0, spec.mean, k)
    assert candidate.valid
    assert candidate.lam == pytest.approx(0.5)
    assert candidate.mu == pytest.approx(4.1 - half**0.25, rel=1e-12)
    assert candidate.nu == pytest.approx(4.1 + half**0.25, rel=1e-12)
    assert candidate.sigma2 == pytest.approx(4.01 - math.sqrt(10.0001), rel=1e-10)
    assert candidate.tau2 == pytest.approx(candidate.sigma2)
    assert candidate.R2 == pytest.approx(0.0, abs=1e-15)


def test_candidate_rejections():
    negative = candidate_from_ps(-1.0, 0.0, 0.0, [0.0, 0.0, 0.5, 0.0])
    assert not negative.valid
    assert negative.reject_reason == RejectReason.VARIANCE_NEGATIVE

    degenerate = candidate_from_ps(0.0, 1.0, 0.0, [0.0, 0.0, 1.0, 0.0])
    assert degenerate.reject_reason == RejectReason.DEGENERATE_DENOMINATOR

    with pytest.raises(DomainError):
        candidate_from_ps(1.0, 0.0, 0.0, [0.0, 0.0, 1.0, 0.0])


def test_refine_ps_returns_to_the_true_invariants():
    model = _centered(MixtureModel.univariate(0.3, -1.0, 2.0, 0.0, 0.0))
    _, mu, nu, _, _ = model.univariate_parameters()
    k = moments_to_cumulants(mixture_moments(model, 5))
    for p, s in ((mu * nu, mu + nu + 1e-6), (mu * nu * (1 + 1e-7), mu + nu)):
        refined = refine_ps(p, s, k)
        assert refined == pytest.approx((mu * nu, mu + nu), rel=1e-12, abs=1e-12)


def test_two_point_masses_survive_fits_of_order_five_and_six():
    model = MixtureModel.univariate(0.3, -1.0, 2.0, 0.0, 0.0)
    truth = model.univariate_parameters()
    for order in (5, 6):
        report = fit_mom(mixture_moments(model, order))
        found = [c.to_mixture().univariate_parameters() for c in report.valid_candidates]
        assert any(np.allclose(f, truth, rtol=1e-9, atol=1e-9) for f in found), (order, report.candidates)


def test_equal_means_recovers_the_variances():
    model = MixtureModel.univariate(0.3, 0.0, 0.0, 1.0, 4.0)
    k = moments_to_cumulants(mixture_moments(model, 6))
    candidate = equal_means_fit(k, 2.0)
    assert candidate.valid
    assert candidate.branch == "equal_means"
    assert candidate.sigma2 + candidate.tau2 == pytest.approx(5.0)
    assert candidate.sigma2 * candidate.tau2 == pytest.approx(4.0)
    assert (candidate.lam, candidate.sigma2, candidate.tau2) == pytest.approx((0.3, 1.0, 4.0))
    assert candidate.mu == candidate.nu == 2.0


@pytest.mark.parametrize("K", range(2, 21))
def test_equal_means_has_no_real_solution_on_the_special_design(K):
    candidate = equal_means_fit(special_cumulants(K), 0.0)
    assert not candidate.valid


def test_equal_means_needs_nonzero_k4():
    candidate = equal_means_fit([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 0.0)
    assert candidate.reject_reason == RejectReason.DEGENERATE_DENOMINATOR


# ------------------------------------------------------------------
# Full fits
# ------------------------------------------------------------------
def test_fit_of_the_special_design(special7):
    report = fit_mom(sample_moments(special7, 6))
    root = 100001**0.25
    variance = (401 - math.sqrt(100001)) / 100
    expected = (0.5, (41 - root) / 10, (41 + root) / 10, variance, variance)
    assert report.selected is not None
    assert _parameters(report) == pytest.approx(expected, rel=1e-9)
    assert SpecialDataSpec(K=7).mom_estimate().univariate_parameters() == pytest.approx(expected, rel=1e-12)
    assert any(c.reject_reason == RejectReason.S_NONREAL for c in report.candidates)
    assert len(report.valid_candidates) == 1


def test_fit_recovers_the_crab_parameters(fig1_model):
    centered = _centered(fig1_model)
    report = fit_mom(mixture_moments(centered, 6))
    assert _parameters(report) == pytest.approx(centered.univariate_parameters(), rel=1e-6)


def test_fit_of_the_crab_parameters_in_raw_coordinates(fig1_model):
    report = fit_mom(mixture_moments(fig1_model, 6))
    assert _parameters(report) == pytest.approx(fig1_model.univariate_parameters(), rel=1e-6)


@pytest.mark.slow
def test_round_trip_on_random_mixtures(rng, draw_mixture):
    failures = []
    for trial in range(1000):
        model = _centered(draw_mixture(rng))
        report = fit_mom(mixture_moments(model, 6))
        truth = model.univariate_parameters()
        if report.selected is None:
            failures.append((trial, truth, None))
        elif not np.allclose(_parameters(report), truth, rtol=1e-6, atol=1e-9):
            failures.append((trial, truth, _parameters(report)))
    assert len(failures) < 10, failures


def test_fit_is_equivariant_under_affine_maps(rng, draw_mixture):
    a, b = 2.5, -1.0
    for _ in range(20):
        model = _centered(draw_mixture(rng))
        lam, mu, nu, sigma2, tau2 = model.univariate_parameters()
        moved = MixtureModel.univariate(lam, a * mu + b, a * nu + b, a * a * sigma2, a * a * tau2)
        base = _parameters(fit_mom(mixture_moments(model, 6)))
        image = _parameters(fit_mom(mixture_moments(moved, 6)))
        expected = (base[0], a * base[1] + b, a * base[2] + b, a * a * base[3], a * a * base[4])
        assert image == pytest.approx(expected, rel=1e-8, abs=1e-10)


def test_valid_candidates_are_ordered_and_sorted(rng, draw_mixture):
    for _ in range(20):
        report = fit_mom(mixture_moments(_centered(draw_mixture(rng)), 6))
        ps = [c.p for c in report.candidates]
        assert ps == sorted(ps)
        for candidate in report.valid_candidates:
            assert candidate.mu <= candidate.nu
            assert 0.0 <= candidate.lam <= 1.0
            assert min(candidate.sigma2, candidate.tau2) >= 0.0
            assert candidate.m6_gap is not None


def test_selected_fit_satisfies_the_relations(rng, draw_mixture):
    for _ in range(20):
        report = fit_mom(mixture_moments(_centered(draw_mixture(rng)), 6))
        for name in ("E1", "E2", "E3"):
            assert report.diagnostics[name] <= 1e-7, name
        assert report.diagnostics["tie_break"] is False


def test_single_gaussian_fallback():
    report = fit_mom(gaussian_moments_1d(1.5, 2.0, 6))
    assert report.selection_rule == SelectionRule.SINGLE_GAUSSIAN_FALLBACK
    model = report.model
    assert model.k == 1
    assert model.components[0].mean[0] == pytest.approx(1.5)
    assert model.components[0].variance == pytest.approx(2.0)
    assert report.selected_candidate.m6_gap == pytest.approx(0.0, abs=1e-9)


def test_likelihood_selection(special7):
    report = fit_mom(sample_moments(special7, 6), select=SelectionRule.LIKELIHOOD, data=special7)
    chosen = report.selected_candidate
    assert report.selection_rule == SelectionRule.LIKELIHOOD
    assert chosen.log_likelihood == pytest.approx(log_likelihood(chosen.to_mixture(), special7))


def test_fifth_order_input_is_only_selected_when_unambiguous(fig1_model):
    report = fit_mom(mixture_moments(_centered(fig1_model), 5))
    ambiguous = len(report.valid_candidates) > 1
    assert all(c.m6_gap is None for c in report.candidates)
    assert "E3" not in report.diagnostics
    assert (report.selected is None) == ambiguous
    assert ("note" in report.diagnostics) == ambiguous


def test_fifth_order_fit_of_the_special_design(special7):
    report = fit_mom(sample_moments(special7, 5))
    assert len(report.valid_candidates) == 1
    assert report.selected is not None
    assert "note" not in report.diagnostics
    expected = SpecialDataSpec(K=7).mom_estimate().univariate_parameters()
    assert _parameters(report) == pytest.approx(expected, rel=1e-9)


def test_fit_argument_errors(special7):
    bivariate = MixtureModel(
        weights=[1.0], components=[GaussianComponent(mean=[0.0, 0.0], covariance=[[1.0, 0.0], [0.0, 1.0]])]
    )
    with pytest.raises(DimensionError):
        fit_mom(mixture_moments(bivariate, 6))
    with pytest.raises(DomainError):
        fit_mom(MomentVector.from_sequence([1.0, 0.0, 1.0, 0.0, 3.0]))
    with pytest.raises(DomainError):
        fit_mom(sample_moments(special7, 6), select=SelectionRule.LIKELIHOOD)
    with pytest.raises(DomainError):
        fit_mom(sample_moments(special7, 6), select=SelectionRule.SINGLE_GAUSSIAN_FALLBACK)
