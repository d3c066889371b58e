"""
Truncated multivariate power series over the reals.

A series in n variables truncated at total order d is stored as a dense
(d+1)^n coefficient cube whose entries above order d are kept at zero. With
d <= 10 and n <= 3 the cube is small, truncation is a mask multiply and
products are direct n-dimensional convolutions.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.signal import convolve

from .errors import DimensionError, DomainError, PreconditionError

MultiIndex = Tuple[int, ...]
Scalar = Union[int, float]


# ------------------------------------------------------------------
# Multi-index helpers
# ------------------------------------------------------------------
def index_order(index: Sequence[int]) -> int:
    return int(sum(index))


@lru_cache(maxsize=None)
def multi_indices(n: int, d: int) -> Tuple[MultiIndex, ...]:
    """All exponent tuples of length n and order <= d, graded, then x1-heavy first."""
    if n < 1 or d < 0:
        raise DomainError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    found = [idx for idx in itertools.product(range(d + 1), repeat=n) if sum(idx) <= d]
    found.sort(key=lambda idx: (sum(idx), tuple(-e for e in idx)))
    return tuple(found)


def format_index(index: Sequence[int]) -> str:
    return ",".join(str(int(e)) for e in index)


def parse_index(key: str, n: int) -> MultiIndex:
    try:
        index = tuple(int(part) for part in key.split(","))
    except ValueError as e:
        raise DomainError(f"malformed multi-index key {key!r}") from e
    if len(index) != n or any(e < 0 for e in index):
        raise DomainError(f"multi-index {key!r} is not {n} non-negative integers")
    return index


@lru_cache(maxsize=None)
def order_mask(n: int, d: int) -> np.ndarray:
    grids = np.indices((d + 1,) * n)
    mask = (grids.sum(axis=0) <= d).astype(float)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=None)
def factorial_weights(n: int, d: int) -> np.ndarray:
    """Cube of i1! * ... * in! (masked to order <= d)."""
    grids = np.indices((d + 1,) * n)
    weights = np.ones((d + 1,) * n)
    for axis in range(n):
        weights = weights * np.vectorize(math.factorial, otypes=[float])(grids[axis])
    weights = weights * order_mask(n, d)
    weights.flags.writeable = False
    return weights


def _as_key(index: Union[int, Sequence[int]], n: int) -> MultiIndex:
    if isinstance(index, (int, np.integer)):
        index = (int(index),)
    index = tuple(int(e) for e in index)
    if len(index) != n:
        raise DimensionError(f"index {index} does not have {n} entries")
    return index


# ------------------------------------------------------------------
# Series type
# ------------------------------------------------------------------
class TruncatedSeries:
    """Immutable power series in n variables, truncated at total order d."""

    __slots__ = ("_n", "_d", "_coeffs")

    def __init__(self, n: int, d: int, coeffs: np.ndarray):
        if n < 1 or d < 0:
            raise DomainError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
        cube = np.asarray(coeffs, dtype=float)
        if cube.shape != (d + 1,) * n:
            raise DimensionError(f"coefficient cube must have shape {(d + 1,) * n}, got {cube.shape}")
        cube = cube * order_mask(n, d)
        cube.flags.writeable = False
        self._n = n
        self._d = d
        self._coeffs = cube

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, n: int, d: int) -> "TruncatedSeries":
        return cls(n, d, np.zeros((d + 1,) * n))

    @classmethod
    def constant(cls, n: int, d: int, value: Scalar) -> "TruncatedSeries":
        cube = np.zeros((d + 1,) * n)
        cube[(0,) * n] = value
        return cls(n, d, cube)

    @classmethod
    def variable(cls, n: int, d: int, axis: int) -> "TruncatedSeries":
        """The series t_axis (0-based axis)."""
        if not 0 <= axis < n:
            raise DimensionError(f"axis {axis} out of range for n={n}")
        index = [0] * n
        index[axis] = 1
        return cls.from_mapping(n, d, {tuple(index): 1.0})

    @classmethod
    def from_mapping(cls, n: int, d: int, coeffs: Mapping[Sequence[int], Scalar]) -> "TruncatedSeries":
        """Build from {multi-index: coefficient}; indices above order d are dropped."""
        cube = np.zeros((d + 1,) * n)
        for index, value in coeffs.items():
            key = _as_key(index, n)
            if any(e < 0 for e in key):
                raise DomainError(f"negative exponent in {key}")
            if sum(key) <= d:
                cube[key] += value
        return cls(n, d, cube)

    # accessors ---------------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def d(self) -> int:
        return self._d

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def __getitem__(self, index: Union[int, Sequence[int]]) -> float:
        key = _as_key(index, self._n)
        if sum(key) > self._d or any(e < 0 for e in key):
            return 0.0
        return float(self._coeffs[key])

    def constant_term(self) -> float:
        return float(self._coeffs[(0,) * self._n])

    def items(self) -> Iterator[Tuple[MultiIndex, float]]:
        for index in multi_indices(self._n, self._d):
            yield index, float(self._coeffs[index])

    def to_mapping(self, skip_zeros: bool = True) -> Dict[MultiIndex, float]:
        return {idx: v for idx, v in self.items() if v != 0.0 or not skip_zeros}

    # arithmetic --------------------------------------------------------
    def _check_compatible(self, other: "TruncatedSeries") -> None:
        if self._n != other._n or self._d != other._d:
            raise DimensionError(
                f"series shapes differ: (n={self._n}, d={self._d}) vs (n={other._n}, d={other._d})"
            )

    def __add__(self, other: Union["TruncatedSeries", Scalar]) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check_compatible(other)
            return TruncatedSeries(self._n, self._d, self._coeffs + other._coeffs)
        return self + TruncatedSeries.constant(self._n, self._d, other)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self._n, self._d, -self._coeffs)

    def __sub__(self, other: Union["TruncatedSeries", Scalar]) -> "TruncatedSeries":
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "TruncatedSeries":
        return (-self) + other

    def __mul__(self, other: Union["TruncatedSeries", Scalar]) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(self._n, self._d, self._coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "TruncatedSeries":
        return TruncatedSeries(self._n, self._d, self._coeffs / float(other))

    def allclose(self, other: "TruncatedSeries", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        self._check_compatible(other)
        scale = max(float(np.abs(other._coeffs).max(initial=0.0)), 1.0)
        return bool(np.allclose(self._coeffs, other._coeffs, rtol=rtol, atol=atol + rtol * scale))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._n == other._n and self._d == other._d and np.array_equal(self._coeffs, other._coeffs)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        terms: List[str] = []
        for index, value in self.items():
            if value != 0.0:
                terms.append(f"{value:g}*t^({format_index(index)})")
        return f"TruncatedSeries(n={self._n}, d={self._d}, {' + '.join(terms) or '0'})"


# ------------------------------------------------------------------
# Operations
# ------------------------------------------------------------------
def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Product of two series, discarding every term of order above d."""
    a._check_compatible(b)
    full = convolve(a.coeffs, b.coeffs, method="direct")
    window = tuple(slice(0, a.d + 1) for _ in range(a.n))
    return TruncatedSeries(a.n, a.d, full[window])


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """exp(a) = sum_j a^j / j!, for a with zero constant term."""
    if a.constant_term() != 0.0:
        raise PreconditionError(f"exp needs a zero constant term, got {a.constant_term()!r}")
    result = TruncatedSeries.constant(a.n, a.d, 1.0)
    term = result
    for j in range(1, a.d + 1):
        term = series_mul(term, a) / j
        result = result + term
    return result


def series_log(a: TruncatedSeries, tol: float = 1e-12) -> TruncatedSeries:
    """log(a) = sum_j (-1)^(j+1) (a-1)^j / j, for a with constant term 1."""
    if abs(a.constant_term() - 1.0) > tol:
        raise PreconditionError(f"log needs constant term 1, got {a.constant_term()!r}")
    u = a - a.constant_term()
    result = TruncatedSeries.zero(a.n, a.d)
    power = TruncatedSeries.constant(a.n, a.d, 1.0)
    for j in range(1, a.d + 1):
        power = series_mul(power, u)
        sign = 1.0 if j % 2 == 1 else -1.0
        result = result + power * (sign / j)
    return result


# ------------------------------------------------------------------
# Exponential (factorial-scaled) generating functions
# ------------------------------------------------------------------
def from_exponential_values(n: int, d: int, values: np.ndarray) -> TruncatedSeries:
    """Series whose t^i coefficient is values[i] / i!."""
    weights = factorial_weights(n, d)
    return TruncatedSeries(n, d, np.divide(values, weights, out=np.zeros_like(weights), where=weights > 0))


def to_exponential_values(series: TruncatedSeries) -> np.ndarray:
    """Cube of i! times the t^i coefficient."""
    return series.coeffs * factorial_weights(series.n, series.d)
