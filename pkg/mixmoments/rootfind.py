"""
Real roots of univariate real polynomials of small degree.

Roots come from the eigenvalues of the companion matrix of a rescaled
polynomial. Eigenvalues that float arithmetic split off a multiple root are
merged back into clusters, each real cluster is polished by Newton steps on the
original polynomial and reported with its multiplicity. Sturm sequences in
exact rational arithmetic are available for independent root counting.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from .errors import DomainError

logger = logging.getLogger(__name__)

TRIM_TOL = 1e-14
IMAG_TOL = 1e-8
DEFAULT_CLUSTER_TOL = 1e-6
_EPS = float(np.finfo(float).eps)
_NOISE_MARGIN = 10.0
_RADIUS_CAP = 1e-3


class UnivariatePolynomial:
    """Polynomial with real coefficients in ascending order of degree."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence[float]):
        array = np.array(coeffs, dtype=float).ravel()
        if array.size == 0:
            array = np.zeros(1)
        if not np.all(np.isfinite(array)):
            raise DomainError("polynomial coefficients must be finite")
        biggest = float(np.abs(array).max())
        if biggest > 0.0:
            keep = np.nonzero(np.abs(array) >= TRIM_TOL * biggest)[0]
            array = array[: keep[-1] + 1]
        else:
            array = array[:1]
        array.flags.writeable = False
        self._coeffs = array

    @classmethod
    def from_roots(cls, roots: Sequence[float], leading: float = 1.0) -> "UnivariatePolynomial":
        return cls(leading * P.polyfromroots(roots))

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        return self._coeffs.size - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self._coeffs[0] == 0.0

    def norm(self) -> float:
        return float(np.abs(self._coeffs).max())

    def __call__(self, x):
        return P.polyval(x, self._coeffs)

    def derivative(self, order: int = 1) -> "UnivariatePolynomial":
        if order > self.degree:
            return UnivariatePolynomial([0.0])
        return UnivariatePolynomial(P.polyder(self._coeffs, order))

    def scaled(self, c: float) -> "UnivariatePolynomial":
        """The polynomial x -> p(c x).

        The result is trimmed like any other polynomial, so a leading term that
        falls below TRIM_TOL of the largest coefficient is lost.
        """
        return UnivariatePolynomial(self._coeffs * c ** np.arange(self._coeffs.size))

    def __repr__(self) -> str:
        return f"UnivariatePolynomial({[float(c) for c in self._coeffs]})"


class Root(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    multiplicity: int = Field(..., ge=1)


class RootSet(BaseModel):
    """Real roots sorted ascending, with |p(root)| per root."""

    model_config = ConfigDict(frozen=True)

    roots: List[Root] = Field(default_factory=list)
    residuals: List[float] = Field(default_factory=list)

    @property
    def values(self) -> List[float]:
        return [r.value for r in self.roots]

    @property
    def multiplicities(self) -> List[int]:
        return [r.multiplicity for r in self.roots]

    def total_multiplicity(self) -> int:
        return sum(self.multiplicities)


# ------------------------------------------------------------------
# Companion eigenvalues and clustering
# ------------------------------------------------------------------
def _balance_scale(coeffs: np.ndarray) -> float:
    """c such that the lowest and highest nonzero coefficients of p(c y) match in size."""
    nonzero = np.nonzero(coeffs)[0]
    lo, hi = int(nonzero[0]), int(nonzero[-1])
    if hi == lo:
        return 1.0
    return float((abs(coeffs[lo]) / abs(coeffs[hi])) ** (1.0 / (hi - lo)))


def _taylor(coeffs: np.ndarray, z: complex, order: int) -> float:
    """|p^(order)(z)| / order!, the Taylor coefficient of p around z."""
    if order > coeffs.size - 1:
        return 0.0
    return abs(P.polyval(z, P.polyder(coeffs, order))) / math.factorial(order)


def _taylor_noise(coeffs: np.ndarray, z: complex, order: int) -> float:
    """Rounding-level uncertainty of _taylor from coefficient perturbations of relative size eps."""
    degree = coeffs.size - 1
    if order > degree:
        return 0.0
    absolute = P.polyder(np.abs(coeffs), order)
    return _EPS * max(degree, 1) * float(P.polyval(abs(z), absolute)) / math.factorial(order)


def _noise_radius(coeffs: np.ndarray, z: complex, multiplicity: int) -> float:
    """Radius around z inside which a root of this multiplicity cannot be resolved, capped at _RADIUS_CAP."""
    cap = _RADIUS_CAP * max(1.0, abs(z))
    leading = _taylor(coeffs, z, multiplicity)
    if leading == 0.0:
        return cap
    return min(cap, (_taylor_noise(coeffs, z, 0) / leading) ** (1.0 / multiplicity))


def _is_multiple_root(coeffs: np.ndarray, centre: complex, multiplicity: int, spread: float) -> bool:
    """Whether p^(j)(centre) is negligible for every j below the multiplicity.

    m roots within spread of centre bound the j-th Taylor coefficient by
    C(m, j) |a_m| spread^(m - j), up to rounding.
    """
    leading = _taylor(coeffs, centre, multiplicity)
    for j in range(multiplicity):
        bound = _taylor_noise(coeffs, centre, j) + math.comb(multiplicity, j) * leading * spread ** (multiplicity - j)
        if _taylor(coeffs, centre, j) > _NOISE_MARGIN * bound:
            return False
    return True


def _cluster(eigenvalues: np.ndarray, coeffs: np.ndarray, tol: float) -> List[List[complex]]:
    """Agglomerate eigenvalues whose spread is explained by a multiple root."""
    scale = max(float(np.abs(eigenvalues).max(initial=0.0)), 1.0)
    clusters: List[List[complex]] = [[complex(z)] for z in eigenvalues]
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        pairs = sorted(
            combinations(range(len(clusters)), 2),
            key=lambda ij: abs(np.mean(clusters[ij[0]]) - np.mean(clusters[ij[1]])),
        )
        for i, j in pairs:
            members = clusters[i] + clusters[j]
            centre = complex(np.mean(members))
            spread = max(abs(z - centre) for z in members)
            allowed = max(tol * scale, _NOISE_MARGIN * _noise_radius(coeffs, centre, len(members)))
            if spread <= allowed and _is_multiple_root(coeffs, centre, len(members), spread):
                clusters[i] = members
                del clusters[j]
                merged = True
                break
    return clusters


def _polish(poly: UnivariatePolynomial, x: float, multiplicity: int, steps: int = 12) -> float:
    """Multiplicity-aware Newton steps, kept only while |p| decreases."""
    first = poly.derivative()
    value = abs(poly(x))
    for _ in range(steps):
        if value == 0.0:
            break
        slope = first(x)
        if slope == 0.0:
            break
        candidate = x - multiplicity * poly(x) / slope
        candidate_value = abs(poly(candidate))
        if not candidate_value < value:
            break
        x, value = candidate, candidate_value
    return float(x)


def real_roots(p: UnivariatePolynomial, tol: float = DEFAULT_CLUSTER_TOL) -> RootSet:
    """All real roots of p with multiplicities.

    Args:
        p: Polynomial of degree >= 1.
        tol: Clustering tolerance relative to the root scale.

    Returns:
        RootSet sorted ascending.

    Raises:
        DomainError: If p is the zero polynomial or a nonzero constant.
    """
    if p.is_zero():
        raise DomainError("the zero polynomial has no isolated roots")
    if p.degree < 1:
        raise DomainError("a nonzero constant has no roots")

    coeffs = p.coeffs
    zero_multiplicity = int(np.argmax(coeffs != 0.0))
    found: List[Tuple[float, int]] = []
    if zero_multiplicity:
        found.append((0.0, zero_multiplicity))

    reduced = coeffs[zero_multiplicity:]
    if reduced.size > 1:
        c = _balance_scale(reduced)
        balanced = reduced * c ** np.arange(reduced.size)
        balanced = balanced / np.abs(balanced).max()
        eigenvalues = linalg.eigvals(P.polycompanion(balanced))
        spectral = max(float(np.abs(eigenvalues).max(initial=0.0)), 1.0)
        for members in _cluster(eigenvalues, balanced, tol):
            centre = complex(np.mean(members))
            imag_limit = max(IMAG_TOL * spectral, _NOISE_MARGIN * _noise_radius(balanced, centre, len(members)))
            if abs(centre.imag) > imag_limit:
                continue
            value = _polish(p, c * centre.real, len(members))
            found.append((value, len(members)))

    found.sort(key=lambda item: item[0])
    roots = [Root(value=v, multiplicity=m) for v, m in found]
    residuals = [float(abs(p(r.value))) for r in roots]
    logger.debug(f"real_roots: degree {p.degree}, roots {[(r.value, r.multiplicity) for r in roots]}")
    return RootSet(roots=roots, residuals=residuals)


# ------------------------------------------------------------------
# Sturm sequences (exact)
# ------------------------------------------------------------------
def _to_fractions(coeffs: Sequence[float]) -> List[Fraction]:
    out = [Fraction(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _fraction_rem(num: List[Fraction], den: List[Fraction]) -> List[Fraction]:
    rem = list(num)
    while len(rem) >= len(den) and any(rem):
        factor = rem[-1] / den[-1]
        shift = len(rem) - len(den)
        for i, c in enumerate(den):
            rem[shift + i] -= factor * c
        rem.pop()
        while len(rem) > 1 and rem[-1] == 0:
            rem.pop()
    return rem


def sturm_sequence(coeffs: Sequence[float]) -> List[List[Fraction]]:
    """p, p', -rem(p, p'), ... in exact arithmetic, ascending coefficients."""
    p0 = _to_fractions(coeffs)
    p1 = [i * c for i, c in enumerate(p0)][1:] or [Fraction(0)]
    chain = [p0, p1]
    while len(chain[-1]) > 1 or chain[-1][0] != 0:
        rem = _fraction_rem(chain[-2], chain[-1])
        if not any(rem):
            break
        chain.append([-c for c in rem])
        if len(rem) == 1:
            break
    return chain


def _sign_changes(signs: Sequence[int]) -> int:
    nonzero = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)


def _sign_at_infinity(poly: List[Fraction], positive: bool) -> int:
    lead = poly[-1]
    sign = (lead > 0) - (lead < 0)
    if not positive and (len(poly) - 1) % 2 == 1:
        sign = -sign
    return sign


def count_real_roots(coeffs: Sequence[float], interval: Optional[Tuple[float, float]] = None) -> int:
    """Number of distinct real roots (in the half-open interval (a, b] if given)."""
    chain = sturm_sequence(coeffs)
    if interval is None:
        low = [_sign_at_infinity(q, positive=False) for q in chain]
        high = [_sign_at_infinity(q, positive=True) for q in chain]
    else:
        a, b = (Fraction(v) for v in interval)

        def _signs(x: Fraction) -> List[int]:
            values = [sum(c * x**i for i, c in enumerate(q)) for q in chain]
            return [(v > 0) - (v < 0) for v in values]

        low, high = _signs(a), _signs(b)
    return _sign_changes(low) - _sign_changes(high)
