"""
Forward moment maps (Gaussians and Gaussian mixtures) and empirical moments.

Also home of the graded vector container shared by moment and cumulant
vectors, and of the Dataset type with its CSV form.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import IO, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionError, DomainError
from .models import GaussianComponent, MixtureModel, VectorDocument
from .series import (
    MultiIndex,
    format_index,
    from_exponential_values,
    multi_indices,
    order_mask,
    parse_index,
    series_exp,
    to_exponential_values,
)

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------
# Graded vectors
# ------------------------------------------------------------------
class GradedVector:
    """Values indexed by every multi-index of order 0..d in n variables."""

    __slots__ = ("_n", "_d", "_values")
    kind = "vector"

    def __init__(self, n: int, d: int, values: np.ndarray):
        if n < 1 or d < 0:
            raise DomainError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
        cube = np.array(values, dtype=float)
        if cube.shape != (d + 1,) * n:
            raise DimensionError(f"{self.kind} cube must have shape {(d + 1,) * n}, got {cube.shape}")
        cube = cube * order_mask(n, d)
        if not np.all(np.isfinite(cube)):
            raise DomainError(f"{self.kind} entries must be finite")
        cube = self._validate(cube)
        cube.flags.writeable = False
        self._n = n
        self._d = d
        self._values = cube

    def _validate(self, cube: np.ndarray) -> np.ndarray:
        return cube

    # constructors ------------------------------------------------------
    @classmethod
    def from_sequence(cls, values: Sequence[float]):
        """Univariate vector (v_0, ..., v_d)."""
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("a univariate vector needs a non-empty 1-D sequence")
        return cls(1, values.size - 1, values)

    @classmethod
    def from_mapping(cls, n: int, d: int, values: Mapping[Sequence[int], float]):
        """Build from {multi-index: value}; every index of order <= d must be present."""
        cube = np.zeros((d + 1,) * n)
        seen = set()
        for index, value in values.items():
            key = (int(index),) if isinstance(index, (int, np.integer)) else tuple(int(e) for e in index)
            if len(key) != n or any(e < 0 for e in key):
                raise DomainError(f"index {key} is not {n} non-negative integers")
            if sum(key) > d:
                raise DomainError(f"index {key} exceeds order {d}")
            cube[key] = value
            seen.add(key)
        missing = [format_index(idx) for idx in multi_indices(n, d) if idx not in seen]
        if missing:
            raise DomainError(f"missing {cls.kind} entries: {', '.join(missing[:8])}"
                              + (" ..." if len(missing) > 8 else ""))
        return cls(n, d, cube)

    @classmethod
    def from_document(cls, document: Union[VectorDocument, Mapping]):
        if not isinstance(document, VectorDocument):
            document = VectorDocument.model_validate(document)
        values = {parse_index(key, document.n): v for key, v in document.values.items()}
        return cls.from_mapping(document.n, document.d, values)

    # accessors ---------------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def d(self) -> int:
        return self._d

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __getitem__(self, index: Union[int, Sequence[int]]) -> float:
        key = (int(index),) if isinstance(index, (int, np.integer)) else tuple(int(e) for e in index)
        if len(key) != self._n:
            raise DimensionError(f"index {key} does not have {self._n} entries")
        if sum(key) > self._d or any(e < 0 for e in key):
            raise DomainError(f"index {key} is outside order {self._d}")
        return float(self._values[key])

    def items(self) -> Iterator[Tuple[MultiIndex, float]]:
        for index in multi_indices(self._n, self._d):
            yield index, float(self._values[index])

    def sequence(self) -> List[float]:
        if self._n != 1:
            raise DimensionError("sequence() is only defined for univariate vectors")
        return [float(v) for v in self._values]

    def truncate(self, d: int):
        if d > self._d or d < 0:
            raise DomainError(f"cannot truncate order {self._d} to {d}")
        window = tuple(slice(0, d + 1) for _ in range(self._n))
        return type(self)(self._n, d, self._values[window])

    def to_document(self) -> VectorDocument:
        return VectorDocument(
            n=self._n,
            d=self._d,
            values={format_index(idx): v for idx, v in self.items()},
        )

    def allclose(self, other: "GradedVector", rtol: float = 1e-12) -> bool:
        if (self._n, self._d) != (other._n, other._d):
            return False
        scale = max(float(np.abs(other._values).max(initial=0.0)), 1.0)
        return bool(np.allclose(self._values, other._values, rtol=rtol, atol=rtol * scale))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self._n}, d={self._d})"


class MomentVector(GradedVector):
    """Moments m_i of order <= d, kept in the chart m_0 = 1."""

    __slots__ = ()
    kind = "moment"

    def _validate(self, cube: np.ndarray) -> np.ndarray:
        origin = (0,) * cube.ndim
        m0 = float(cube[origin])
        if m0 <= 0.0:
            raise DomainError(f"m0 must be positive, got {m0!r}")
        if m0 != 1.0:
            logger.debug(f"Normalizing moment vector by m0={m0!r}")
            cube = cube / m0
        return cube


# ------------------------------------------------------------------
# Datasets
# ------------------------------------------------------------------
class Dataset:
    """A non-empty sample of N observations in n dimensions."""

    __slots__ = ("_rows", "_label")

    def __init__(self, rows: Union[np.ndarray, Sequence], label: Optional[str] = None):
        try:
            array = np.array(rows, dtype=float)
        except (TypeError, ValueError) as e:
            raise DomainError(f"dataset rows must be numeric and of equal length: {e}") from e
        if array.ndim == 1:
            array = array[:, None]
        if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] == 0:
            raise DomainError("dataset must be a non-empty list of equal-length rows")
        if not np.all(np.isfinite(array)):
            raise DomainError("dataset entries must be finite")
        array.flags.writeable = False
        self._rows = array
        self._label = label

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def label(self) -> Optional[str]:
        return self._label

    @property
    def n(self) -> int:
        return self._rows.shape[1]

    def __len__(self) -> int:
        return self._rows.shape[0]

    def column(self, axis: int = 0) -> np.ndarray:
        return self._rows[:, axis]

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Dataset":
        """One observation per line, comma-separated; an optional '#' header is the label."""
        path = Path(path)
        if not path.is_file():
            raise DomainError(f"dataset file not found: {path}")
        label = None
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline()
        if first.startswith("#"):
            label = first[1:].strip() or None
        try:
            rows = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except ValueError as e:
            raise DomainError(f"malformed dataset {path}: {e}") from e
        if rows.size == 0:
            raise DomainError(f"dataset {path} has no observations")
        return cls(rows, label=label)

    def to_csv(self, target: Union[str, Path, IO[str]]) -> None:
        np.savetxt(target, self._rows, delimiter=",", fmt="%.17g", header=self._label or "", comments="# ")


# ------------------------------------------------------------------
# Forward maps
# ------------------------------------------------------------------
def gaussian_moments_1d(mean: float, variance: float, d: int) -> MomentVector:
    """Moments of N(mean, variance) via m_i = mean*m_{i-1} + (i-1)*variance*m_{i-2}."""
    if d < 0:
        raise DomainError(f"order must be non-negative, got {d}")
    if variance < 0:
        raise DomainError(f"variance must be non-negative, got {variance!r}")
    m = np.zeros(d + 1)
    m[0] = 1.0
    if d >= 1:
        m[1] = mean
    for i in range(2, d + 1):
        m[i] = mean * m[i - 1] + (i - 1) * variance * m[i - 2]
    return MomentVector(1, d, m)


def gaussian_cumulant_cube(comp: GaussianComponent, d: int) -> np.ndarray:
    """Cumulant cube of a Gaussian: mean at order 1, covariance at order 2, zero above."""
    n = comp.n
    cov = comp.covariance_array()
    if float(np.linalg.eigvalsh(cov).min()) < -1e-12 * abs(float(np.trace(cov))):
        raise DomainError("covariance is not positive semidefinite")
    cube = np.zeros((d + 1,) * n)
    if d >= 1:
        for i, mu in enumerate(comp.mean):
            index = [0] * n
            index[i] = 1
            cube[tuple(index)] = mu
    if d >= 2:
        for i in range(n):
            for j in range(i, n):
                index = [0] * n
                index[i] += 1
                index[j] += 1
                cube[tuple(index)] = cov[i, j]
    return cube


def gaussian_moments_nd(comp: GaussianComponent, d: int) -> MomentVector:
    """Moments of a Gaussian as i! times the coefficients of exp(t.mu + t'Sigma t / 2)."""
    if d < 0:
        raise DomainError(f"order must be non-negative, got {d}")
    n = comp.n
    log_mgf = from_exponential_values(n, d, gaussian_cumulant_cube(comp, d))
    return MomentVector(n, d, to_exponential_values(series_exp(log_mgf)))


def component_moments(comp: GaussianComponent, d: int) -> MomentVector:
    if comp.n == 1:
        return gaussian_moments_1d(comp.mean[0], comp.variance, d)
    return gaussian_moments_nd(comp, d)


def mixture_moments(model: MixtureModel, d: int) -> MomentVector:
    """Weighted sum of the component moment vectors."""
    cube = np.zeros((d + 1,) * model.n)
    for weight, comp in zip(model.weights, model.components):
        cube = cube + weight * component_moments(comp, d).values
    return MomentVector(model.n, d, cube)


def sample_moments(data: Dataset, d: int, centered: bool = False) -> MomentVector:
    """Plug-in moments (1/N) sum x^i, optionally about the sample mean."""
    if d < 0:
        raise DomainError(f"order must be non-negative, got {d}")
    x = data.rows
    if centered:
        x = x - x.mean(axis=0)
    n = data.n
    powers = x[:, :, None] ** np.arange(d + 1)
    cube = np.zeros((d + 1,) * n)
    for index in multi_indices(n, d):
        monomial = np.ones(len(data))
        for axis, exponent in enumerate(index):
            if exponent:
                monomial = monomial * powers[:, axis, exponent]
        cube[index] = monomial.mean()
    return MomentVector(n, d, cube)
