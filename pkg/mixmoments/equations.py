"""
Polynomial relations between the normalized-mean invariants (p, s) and the
cumulants of a two-component univariate Gaussian mixture.

p and s are the product and sum of the component means measured from the
overall mean. Each relation is returned as the array of its monomial values so
callers can form both the raw value (sum) and a scale (largest |monomial|).
k is any mapping or sequence indexable by cumulant order; k[1] is never read.
"""
from __future__ import annotations

from typing import Callable, Dict, Sequence

import numpy as np


def _terms(*values: float) -> np.ndarray:
    return np.array(values, dtype=float)


def pearson_coefficients(k3: float, k4: float, k5: float) -> np.ndarray:
    """Ascending coefficients of the degree-9 polynomial satisfied by p."""
    return np.array(
        [
            -8 * k3**6,
            -32 * k3**4 * k4,
            -(21 * k3**2 * k4**2 + 24 * k3**3 * k5),
            96 * k3**4 + 9 * k4**3 - 36 * k3 * k4 * k5,
            148 * k3**2 * k4 - 6 * k5**2,
            24 * k3 * k5 + 30 * k4**2,
            12 * k3**2,
            28 * k4,
            0.0,
            8.0,
        ]
    )


def s_numerator(p: float, k: Sequence[float]) -> float:
    k3, k4, k5 = k[3], k[4], k[5]
    return 4 * p**5 + 14 * p**2 * k3**2 + 8 * p**3 * k4 + k3**2 * k4 + 3 * p * k4**2 - 2 * p * k3 * k5


def s_denominator_terms(p: float, k: Sequence[float]) -> np.ndarray:
    k3, k4, k5 = k[3], k[4], k[5]
    return _terms(4 * p**3 * k3, -4 * k3**3, -6 * p * k3 * k4, -2 * p**2 * k5)


def e1_terms(p: float, s: float, k: Sequence[float]) -> np.ndarray:
    k3, k4 = k[3], k[4]
    return _terms(-2 * p**2 * s**2, -4 * s * p * k3, 6 * p**3, 3 * k4 * p, k3**2)


def e2_terms(p: float, s: float, k: Sequence[float]) -> np.ndarray:
    k3, k5 = k[3], k[5]
    return _terms(-2 * p**2 * s**3, 4 * p**3 * s, 5 * s * k3**2, -20 * p**2 * k3, 3 * k5 * p)


def e3_terms(p: float, s: float, k: Sequence[float]) -> np.ndarray:
    k2, k3, k4, k6 = k[2], k[3], k[4], k[6]
    return _terms(
        -144 * p**5,
        72 * s**2 * p**4,
        -270 * k2 * p**4,
        90 * s**2 * k2 * p**3,
        180 * s * k3 * p**3,
        -4 * s**4 * p**3,
        -135 * k2 * k4 * p**2,
        180 * s * k2 * k3 * p**2,
        -30 * s**3 * k3 * p**2,
        -90 * k3**2 * p**2,
        -9 * k6 * p**2,
        -30 * k3**2 * s**2 * p,
        -45 * k3**2 * k2 * p,
        5 * s * k3**3,
    )


def e4_terms(p: float, s: float, k: Sequence[float]) -> np.ndarray:
    k2, k3, k4, k5, k7 = k[2], k[3], k[4], k[5], k[7]
    return _terms(
        16 * p**3 * s**5,
        -126 * k2 * p**3 * s**3,
        42 * k3 * p**2 * s**4,
        -148 * p**4 * s**3,
        252 * k2 * p**4 * s,
        -126 * k3 * p**3 * s**2,
        216 * p**5 * s,
        315 * k2 * k3**2 * p * s,
        -1260 * k2 * k3 * p**3,
        -35 * k3**3 * s**2,
        210 * k3**2 * p**2 * s,
        -378 * k3 * p**4,
        189 * k2 * k5 * p**2,
        35 * k3**3 * p,
        315 * k3 * k4 * p**2,
        9 * k7 * p**2,
    )


def e5_terms(p: float, s: float, k: Sequence[float]) -> np.ndarray:
    k2, k3, k4, k5, k6, k8 = k[2], k[3], k[4], k[5], k[6], k[8]
    return _terms(
        20 * p**4 * s**6,
        336 * k2 * p**4 * s**4,
        -112 * k3 * p**3 * s**5,
        124 * p**5 * s**4,
        -3780 * k2**2 * p**4 * s**2,
        2520 * k2 * k3 * p**3 * s**3,
        -6048 * k2 * p**5 * s**2,
        -420 * k3**2 * p**2 * s**4,
        2128 * k3 * p**4 * s**3,
        -2232 * p**6 * s**2,
        -7560 * k2**2 * k3 * p**3 * s,
        11340 * k2**2 * p**5,
        2520 * k2 * k3**2 * p**2 * s**2,
        -15120 * k2 * k3 * p**4 * s,
        12096 * k2 * p**6,
        -280 * k3**3 * p * s**3,
        2940 * k3**2 * p**3 * s**2,
        -7056 * k3 * p**5 * s,
        3564 * p**7,
        1890 * k2**2 * k3**2 * p**2,
        5670 * k2**2 * k4 * p**3,
        -420 * k2 * k3**3 * p * s,
        7560 * k2 * k3**2 * p**3,
        35 * k3**4 * s**2,
        280 * k3**3 * p**2 * s,
        -1260 * k3**2 * p**4,
        756 * k2 * k6 * p**3,
        -35 * k3**4 * p,
        1512 * k3 * k5 * p**3,
        945 * k4**2 * p**3,
        27 * k8 * p**3,
    )


# relation name -> (terms, highest cumulant order it reads)
RELATIONS: Dict[str, tuple] = {
    "E1": (e1_terms, 4),
    "E2": (e2_terms, 5),
    "E3": (e3_terms, 6),
    "E4": (e4_terms, 7),
    "E5": (e5_terms, 8),
}


def evaluate(terms: Callable[..., np.ndarray], p: float, s: float, k: Sequence[float], relative: bool = False) -> float:
    values = terms(p, s, k)
    total = float(values.sum())
    if not relative:
        return total
    scale = float(np.abs(values).max(initial=0.0))
    return 0.0 if scale == 0.0 else abs(total) / scale
