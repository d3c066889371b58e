"""
Numerical membership tests for Gaussian moment varieties and their secants.

Every test returns a MembershipVerdict whose residual is dimensionless: a minor
or polynomial is divided by the magnitude of its largest monomial (the
zero-mean quartic by a power of the moment scale), and rank tests compare
singular values to the largest one.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from itertools import combinations, permutations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from .cumulants import CumulantVector, moments_to_cumulants
from .equations import RELATIONS, evaluate
from .errors import DimensionError, DomainError
from .models import MembershipVerdict
from .moments import MomentVector
from .pearson import fit_mom

logger = logging.getLogger(__name__)

MOMENT_TOL = 1e-9
RANK_TOL = 1e-8
SECANT_TOL = 1e-7

# exponents (i, j) indexing rows and columns of the order-4 bivariate moment matrix
VERONESE_BASIS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0))

# (coefficient, factors) of the lowest-degree relation on zero-mean bivariate 2-mixtures
ZERO_MEAN_QUARTIC: Tuple[Tuple[int, Tuple[Tuple[int, int], ...]], ...] = (
    (6, ((1, 5), (2, 2), (3, 1), (3, 1))),
    (-10, ((1, 3), (2, 4), (3, 1), (3, 1))),
    (-2, ((0, 6), (3, 1), (3, 1), (3, 1))),
    (10, ((0, 4), (3, 1), (3, 1), (3, 3))),
    (-9, ((1, 5), (2, 2), (2, 2), (4, 0))),
    (15, ((1, 3), (2, 2), (2, 4), (4, 0))),
    (2, ((1, 3), (1, 5), (3, 1), (4, 0))),
    (3, ((0, 6), (2, 2), (3, 1), (4, 0))),
    (-5, ((0, 4), (2, 4), (3, 1), (4, 0))),
    (-10, ((1, 3), (1, 3), (3, 3), (4, 0))),
    (-1, ((0, 6), (1, 3), (4, 0), (4, 0))),
    (1, ((0, 4), (1, 5), (4, 0), (4, 0))),
    (10, ((1, 3), (1, 3), (3, 1), (4, 2))),
    (-15, ((0, 4), (2, 2), (3, 1), (4, 2))),
    (5, ((0, 4), (1, 3), (4, 0), (4, 2))),
    (-6, ((1, 3), (1, 3), (2, 2), (5, 1))),
    (9, ((0, 4), (2, 2), (2, 2), (5, 1))),
    (-2, ((0, 4), (1, 3), (3, 1), (5, 1))),
    (-1, ((0, 4), (0, 4), (4, 0), (5, 1))),
    (2, ((1, 3), (1, 3), (1, 3), (6, 0))),
    (-3, ((0, 4), (1, 3), (2, 2), (6, 0))),
    (1, ((0, 4), (0, 4), (3, 1), (6, 0))),
)


# ------------------------------------------------------------------
# Linear algebra helpers
# ------------------------------------------------------------------
@lru_cache(maxsize=None)
def _signed_permutations(size: int) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
    out = []
    for perm in permutations(range(size)):
        inversions = sum(1 for a, b in combinations(perm, 2) if a > b)
        out.append((-1 if inversions % 2 else 1, perm))
    return tuple(out)


def _leibniz_terms(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    size = matrix.shape[0]
    return np.array(
        [sign * np.prod(matrix[np.arange(size), perm]) for sign, perm in _signed_permutations(size)]
    )


def normalized_determinant(matrix: NDArray[np.float64]) -> float:
    """|det| divided by the largest |term| of its Leibniz expansion (0 when all terms vanish)."""
    terms = _leibniz_terms(np.asarray(matrix, dtype=float))
    scale = float(np.abs(terms).max(initial=0.0))
    return 0.0 if scale == 0.0 else abs(float(terms.sum())) / scale


def max_normalized_minor(matrix: NDArray[np.float64], size: int) -> float:
    """Largest normalized size x size minor over all row and column choices."""
    rows, cols = matrix.shape
    worst = 0.0
    for r in combinations(range(rows), size):
        for c in combinations(range(cols), size):
            worst = max(worst, normalized_determinant(matrix[np.ix_(r, c)]))
    return worst


def numerical_rank(matrix: NDArray[np.float64], tol: float = RANK_TOL) -> Tuple[int, NDArray[np.float64]]:
    """Count of singular values above tol times the largest, and the singular values."""
    singular = linalg.svdvals(np.asarray(matrix, dtype=float))
    if singular.size == 0 or singular[0] == 0.0:
        return 0, singular
    return int(np.count_nonzero(singular > tol * singular[0])), singular


def left_kernel(matrix: NDArray[np.float64], tol: float = RANK_TOL) -> NDArray[np.float64]:
    """Orthonormal rows spanning {v : v @ matrix = 0} numerically."""
    return linalg.null_space(np.asarray(matrix, dtype=float).T, rcond=tol).T


def _rank_verdict(test: str, matrix: NDArray[np.float64], max_rank: int, tol: float) -> MembershipVerdict:
    rank, singular = numerical_rank(matrix, tol)
    if singular.size == 0 or singular[0] == 0.0 or singular.size <= max_rank:
        residual = 0.0
    else:
        residual = float(singular[max_rank] / singular[0])
    return MembershipVerdict.from_residual(
        test,
        residual,
        tol,
        rank=rank,
        max_rank=max_rank,
        singular_values=[float(v) for v in singular],
    )


def _require(m: MomentVector, n: int, d: int, test: str) -> None:
    if m.n != n:
        raise DimensionError(f"{test} needs n={n} moments, got n={m.n}")
    if m.d < d:
        raise DomainError(f"{test} needs moments through order {d}, got order {m.d}")


# ------------------------------------------------------------------
# Univariate Gaussians and point masses
# ------------------------------------------------------------------
def build_Hd(m: MomentVector, d: Optional[int] = None) -> NDArray[np.float64]:
    """The 3 x d matrix with rows (j m_{j-1}), (m_j), (m_{j+1}) for j = 0..d-1."""
    d = m.d if d is None else d
    if d < 3:
        raise DomainError(f"H_d needs d >= 3, got {d}")
    _require(m, 1, d, "build_Hd")
    values = m.sequence()
    return np.array(
        [
            [j * values[j - 1] if j else 0.0 for j in range(d)],
            values[:d],
            values[1 : d + 1],
        ]
    )


def residual_G1d(m: MomentVector, d: Optional[int] = None, threshold: float = MOMENT_TOL) -> MembershipVerdict:
    """Membership in the univariate Gaussian moment variety: all 3x3 minors of H_d vanish."""
    d = m.d if d is None else d
    matrix = build_Hd(m, d)
    rank, singular = numerical_rank(matrix)
    residual = max_normalized_minor(matrix, 3)
    return MembershipVerdict.from_residual(
        "g1d",
        residual,
        threshold,
        d=d,
        rank=rank,
        singular_values=[float(v) for v in singular],
    )


def hankel_rank(m: MomentVector, d: Optional[int] = None, max_rank: int = 2, tol: float = RANK_TOL) -> MembershipVerdict:
    """Rank of the (d/2+1)-square Hankel matrix (m_{i+j}); at most k for k point masses."""
    d = m.d if d is None else d
    if d < 2 or d % 2:
        raise DomainError(f"the Hankel test needs an even order >= 2, got {d}")
    _require(m, 1, d, "hankel_rank")
    values = m.sequence()
    half = d // 2
    matrix = linalg.hankel(values[: half + 1], values[half : d + 1])
    return _rank_verdict("hankel", matrix, max_rank, tol)


def gaussian_cumulant_residual(m: MomentVector, threshold: float = MOMENT_TOL) -> MembershipVerdict:
    """Gaussian membership in cumulant coordinates: every cumulant above order 2 is zero."""
    k = moments_to_cumulants(m)
    scale = float(np.abs(m.values).max())
    higher = [abs(v) for index, v in k.items() if sum(index) >= 3]
    residual = max(higher, default=0.0) / scale
    return MembershipVerdict.from_residual("gaussian-cumulants", residual, threshold, n=m.n, d=m.d)


# ------------------------------------------------------------------
# Bivariate
# ------------------------------------------------------------------
def build_veronese(m: MomentVector) -> NDArray[np.float64]:
    _require(m, 2, 4, "veronese_residual")
    return np.array([[m[(a[0] + b[0], a[1] + b[1])] for b in VERONESE_BASIS] for a in VERONESE_BASIS])


def veronese_residual(m: MomentVector, max_rank: int = 2, tol: float = RANK_TOL) -> MembershipVerdict:
    """Rank of the 6x6 order-4 moment matrix: 1 for a point mass, <= 2 for two."""
    return _rank_verdict("veronese24", build_veronese(m), max_rank, tol)


def build_hilbert_burch(m: MomentVector) -> NDArray[np.float64]:
    _require(m, 2, 3, "hilbert_burch_residual")
    m00, m10, m01 = m[(0, 0)], m[(1, 0)], m[(0, 1)]
    m20, m11, m02 = m[(2, 0)], m[(1, 1)], m[(0, 2)]
    m30, m21, m12, m03 = m[(3, 0)], m[(2, 1)], m[(1, 2)], m[(0, 3)]
    return np.array(
        [
            [0.0, 0.0, m00, m10, m01],
            [0.0, m10, m20, m30, m21],
            [m01, 0.0, m02, m12, m03],
            [0.0, m00, 2 * m10, 2 * m20, 2 * m11],
            [m00, 0.0, 2 * m01, 2 * m11, 2 * m02],
            [m10, m01, 2 * m11, 2 * m21, 2 * m12],
        ]
    )


def hilbert_burch_residual(m: MomentVector, threshold: float = MOMENT_TOL) -> MembershipVerdict:
    """Equal-covariance bivariate 2-mixtures: the maximal minors of the 6x5 matrix vanish."""
    matrix = build_hilbert_burch(m)
    residual = max_normalized_minor(matrix, 5)
    rank, _ = numerical_rank(matrix)
    return MembershipVerdict.from_residual("hb23", residual, threshold, rank=rank)


def _whitening(m: MomentVector) -> NDArray[np.float64]:
    """Inverse Cholesky factor of the second-moment matrix, or the identity when it is singular."""
    second = np.array([[m[(2, 0)], m[(1, 1)]], [m[(1, 1)], m[(0, 2)]]]) / m[(0, 0)]
    try:
        lower = linalg.cholesky(second, lower=True)
    except linalg.LinAlgError:
        return np.eye(2)
    return linalg.solve_triangular(lower, np.eye(2), lower=True)


def _transformed_moment(m: MomentVector, A: NDArray[np.float64], index: Tuple[int, int]) -> float:
    """E[(A x)_1^i (A x)_2^j] from the moments of x, expanding the two linear forms."""
    i, j = index
    # coefficients of x1^a x2^(i + j - a), a ascending
    form = np.ones(1)
    for _ in range(i):
        form = np.convolve(form, [A[0, 1], A[0, 0]])
    for _ in range(j):
        form = np.convolve(form, [A[1, 1], A[1, 0]])
    order = i + j
    return float(sum(c * m[(a, order - a)] for a, c in enumerate(form))) / m[(0, 0)]


def zero_mean_quartic(m: MomentVector, threshold: float = MOMENT_TOL) -> MembershipVerdict:
    """The quartic in order-4 and order-6 moments vanishing on zero-mean bivariate 2-mixtures.

    The moments are first whitened by the inverse Cholesky factor of the
    second-moment matrix; the quartic only changes by a power of the
    determinant under a linear change of coordinates, so membership is
    unaffected. The residual is |q| over r^18, where r is the largest
    |m_a|^(1/|a|) among the whitened moments it reads.
    """
    _require(m, 2, 6, "zero_mean_quartic")
    if m[(0, 0)] == 0.0:
        raise DomainError("zero_mean_quartic needs m00 != 0")
    A = _whitening(m)
    used = sorted({index for _, factors in ZERO_MEAN_QUARTIC for index in factors})
    white = {index: _transformed_moment(m, A, index) for index in used}
    value = float(
        sum(coefficient * np.prod([white[index] for index in factors]) for coefficient, factors in ZERO_MEAN_QUARTIC)
    )
    radius = max(abs(white[index]) ** (1.0 / sum(index)) for index in used)
    residual = 0.0 if radius == 0.0 else abs(value) / radius**18
    return MembershipVerdict.from_residual("zeromean-quartic", residual, threshold, value=value)


# ------------------------------------------------------------------
# Secant of the univariate Gaussian variety
# ------------------------------------------------------------------
def secant2_residuals(k: CumulantVector, p: float, s: float, relative: bool = False) -> List[float]:
    """E1..E5 at (p, s), as many as the cumulant order allows (5 -> E1, E2; 8 -> all five)."""
    if k.n != 1:
        raise DimensionError(f"secant residuals need univariate cumulants, got n={k.n}")
    if k.d < 5:
        raise DomainError(f"secant residuals need cumulants through order 5, got order {k.d}")
    ks = k.sequence()
    return [
        evaluate(terms, p, s, ks, relative=relative)
        for terms, order in RELATIONS.values()
        if order <= k.d
    ]


def secant2_residual_membership(m: MomentVector, threshold: float = SECANT_TOL) -> MembershipVerdict:
    """Fit (p, s) from m itself and report the largest relative residual of E1..E5."""
    chosen = fit_mom(m).selected_candidate
    if chosen is None:
        return MembershipVerdict.from_residual("secant2-residuals", 1.0, threshold, selected=None)
    residuals = secant2_residuals(moments_to_cumulants(m), chosen.p, chosen.s or 0.0, relative=True)
    return MembershipVerdict.from_residual(
        "secant2-residuals",
        max(residuals),
        threshold,
        p=chosen.p,
        s=chosen.s,
        residuals=residuals,
    )


def candidate_sixth_moments(m: MomentVector) -> List[float]:
    """m6 of every valid two-component candidate fitted to orders <= 5."""
    report = fit_mom(m.truncate(5))
    return [c.m6_model for c in report.candidates if c.valid and c.m6_model is not None]


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def secant2_g16_membership(m: MomentVector, threshold: float = SECANT_TOL) -> MembershipVerdict:
    """m lies on the secant of the order-6 Gaussian variety iff some candidate reproduces m6."""
    _require(m, 1, 6, "secant2_g16_membership")
    m6 = m[6]
    sixth: Sequence[float] = candidate_sixth_moments(m)
    if sixth:
        residual = min(_relative_gap(c, m6) for c in sixth)
    else:
        logger.debug("secant2_g16_membership: no valid candidate on orders <= 5")
        residual = 1.0
    return MembershipVerdict.from_residual(
        "secant2-g16", residual, threshold, m6=m6, candidate_m6=list(sixth)
    )
