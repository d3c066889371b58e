import numpy as np
import pytest
from pydantic import ValidationError

from mixmoments.errors import DimensionError, DomainError
from mixmoments.models import GaussianComponent, MixtureModel
from mixmoments.moments import (
    Dataset,
    MomentVector,
    gaussian_moments_1d,
    gaussian_moments_nd,
    mixture_moments,
    sample_moments,
)


def test_standard_normal_moments():
    assert gaussian_moments_1d(0.0, 1.0, 6).sequence() == [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0]


def test_point_mass_moments_are_powers():
    assert gaussian_moments_1d(2.0, 0.0, 5).sequence() == [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]


def test_negative_variance_is_rejected():
    with pytest.raises(DomainError):
        gaussian_moments_1d(0.0, -1.0, 4)


def test_series_and_recurrence_agree_in_one_dimension():
    comp = GaussianComponent.univariate(1.7, 0.3)
    assert gaussian_moments_nd(comp, 8).allclose(gaussian_moments_1d(1.7, 0.3, 8), rtol=1e-13)


def test_bivariate_gaussian_low_orders():
    comp = GaussianComponent(mean=[1.0, -2.0], covariance=[[2.0, 0.5], [0.5, 1.0]])
    m = gaussian_moments_nd(comp, 4)
    assert m[(1, 0)] == pytest.approx(1.0)
    assert m[(0, 1)] == pytest.approx(-2.0)
    assert m[(2, 0)] == pytest.approx(2.0 + 1.0)
    assert m[(1, 1)] == pytest.approx(0.5 - 2.0)
    assert m[(0, 2)] == pytest.approx(1.0 + 4.0)
    # E[x^2 y^2] for a Gaussian with these parameters
    assert m[(2, 2)] == pytest.approx(2.0 * 1.0 + 2 * 0.5**2 + 2.0 * 4.0 + 1.0 * 1.0 + 4 * 1.0 * -2.0 * 0.5 + 1.0 * 4.0)


def test_mixture_moments_are_weighted_sums():
    model = MixtureModel.univariate(0.3, -1.0, 2.0, 0.5, 1.5)
    expected = 0.3 * np.array(gaussian_moments_1d(-1.0, 0.5, 6).sequence()) + 0.7 * np.array(
        gaussian_moments_1d(2.0, 1.5, 6).sequence()
    )
    assert mixture_moments(model, 6).sequence() == pytest.approx(expected.tolist(), rel=1e-14)


def test_moment_vectors_are_kept_in_the_unit_chart():
    m = MomentVector.from_sequence([2.0, 1.0, 4.0])
    assert m.sequence() == [1.0, 0.5, 2.0]
    with pytest.raises(DomainError):
        MomentVector.from_sequence([0.0, 1.0])


def test_from_mapping_reports_missing_entries():
    with pytest.raises(DomainError, match="1,1"):
        MomentVector.from_mapping(2, 2, {(0, 0): 1.0, (1, 0): 0.0, (0, 1): 0.0, (2, 0): 1.0, (0, 2): 1.0})


def test_indexing_outside_the_order_is_an_error():
    m = gaussian_moments_1d(0.0, 1.0, 3)
    with pytest.raises(DomainError):
        m[4]
    with pytest.raises(DimensionError):
        m[(1, 1)]


def test_document_round_trip():
    comp = GaussianComponent(mean=[0.5, 1.0], covariance=[[1.0, 0.2], [0.2, 0.7]])
    m = gaussian_moments_nd(comp, 4)
    back = MomentVector.from_document(m.to_document())
    assert back.allclose(m, rtol=0.0)
    assert m.truncate(2).d == 2


def test_sample_moments():
    data = Dataset([1.0, 2.0, 3.0])
    m = sample_moments(data, 2)
    assert m.sequence() == pytest.approx([1.0, 2.0, 14.0 / 3.0])
    centred = sample_moments(data, 2, centered=True)
    assert centred.sequence() == pytest.approx([1.0, 0.0, 2.0 / 3.0])


def test_bivariate_sample_moments():
    data = Dataset([[1.0, 2.0], [3.0, -1.0]])
    m = sample_moments(data, 2)
    assert m[(1, 1)] == pytest.approx((2.0 - 3.0) / 2)
    assert m[(0, 2)] == pytest.approx((4.0 + 1.0) / 2)


def test_dataset_validation():
    with pytest.raises(DomainError):
        Dataset([])
    with pytest.raises(DomainError):
        Dataset([1.0, float("nan")])
    assert Dataset([[1.0, 2.0]]).n == 2


def test_dataset_csv_round_trip(tmp_path):
    data = Dataset([[0.1, 2.0], [1e-17, -3.5]], label="two rows")
    path = tmp_path / "data.csv"
    data.to_csv(path)
    back = Dataset.from_csv(path)
    assert back.label == "two rows"
    np.testing.assert_array_equal(back.rows, data.rows)


def test_malformed_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(DomainError):
        Dataset.from_csv(path)


def test_component_validation():
    with pytest.raises(ValidationError):
        GaussianComponent(mean=[0.0, 0.0], covariance=[[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValidationError):
        GaussianComponent(mean=[0.0], covariance=[[1.0, 0.0], [0.0, 1.0]])
    assert GaussianComponent(mean=1.5, covariance=2.0).variance == 2.0


def test_mixture_validation():
    with pytest.raises(ValidationError):
        MixtureModel(weights=[0.5, 0.6], components=[GaussianComponent.univariate(0, 1)] * 2)
    with pytest.raises(ValidationError):
        MixtureModel(
            weights=[0.5, 0.5],
            components=[GaussianComponent.univariate(0, 1), GaussianComponent(mean=[0, 0], covariance=[[1, 0], [0, 1]])],
        )
    assert MixtureModel.univariate(0.25, 0, 1, 1, 2).univariate_parameters() == (0.25, 0.0, 1.0, 1.0, 2.0)
