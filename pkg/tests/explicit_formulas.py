"""Hand-written moment -> cumulant polynomials used as an independent oracle."""


def univariate_cumulants(m):
    """k1..k6 from raw moments m[0..6] (m[0] = 1)."""
    m1, m2, m3, m4, m5, m6 = m[1], m[2], m[3], m[4], m[5], m[6]
    return [
        0.0,
        m1,
        m2 - m1**2,
        m3 - 3 * m1 * m2 + 2 * m1**3,
        m4 - 4 * m1 * m3 - 3 * m2**2 + 12 * m1**2 * m2 - 6 * m1**4,
        m5 - 5 * m1 * m4 - 10 * m2 * m3 + 20 * m1**2 * m3 + 30 * m1 * m2**2 - 60 * m1**3 * m2 + 24 * m1**5,
        m6 - 6 * m1 * m5 - 15 * m2 * m4 + 30 * m1**2 * m4 - 10 * m3**2 + 120 * m1 * m2 * m3
        - 120 * m1**3 * m3 + 30 * m2**3 - 270 * m1**2 * m2**2 + 360 * m1**4 * m2 - 120 * m1**6,
    ]


def bivariate_cumulants(m):
    """Cumulants of orders 3 and 4 from bivariate moments m[(i, j)] with m[(0, 0)] = 1."""
    m10, m01 = m[(1, 0)], m[(0, 1)]
    m20, m11, m02 = m[(2, 0)], m[(1, 1)], m[(0, 2)]
    m30, m21, m12, m03 = m[(3, 0)], m[(2, 1)], m[(1, 2)], m[(0, 3)]
    m40, m31, m22, m13, m04 = m[(4, 0)], m[(3, 1)], m[(2, 2)], m[(1, 3)], m[(0, 4)]
    return {
        (0, 3): 2 * m01**3 - 3 * m01 * m02 + m03,
        (1, 2): 2 * m01**2 * m10 - 2 * m01 * m11 - m02 * m10 + m12,
        (2, 1): 2 * m01 * m10**2 - m01 * m20 - 2 * m10 * m11 + m21,
        (3, 0): 2 * m10**3 - 3 * m10 * m20 + m30,
        (0, 4): -6 * m01**4 + 12 * m01**2 * m02 - 4 * m01 * m03 - 3 * m02**2 + m04,
        # the -3 m02 m11 and -m03 m10 terms are separate summands
        (1, 3): -6 * m01**3 * m10 + 6 * m01**2 * m11 + 6 * m01 * m02 * m10
        - 3 * m01 * m12 - 3 * m02 * m11 - m03 * m10 + m13,
        (2, 2): -6 * m01**2 * m10**2 + 2 * m01**2 * m20 + 8 * m01 * m10 * m11 + 2 * m02 * m10**2
        - 2 * m01 * m21 - m02 * m20 - 2 * m10 * m12 - 2 * m11**2 + m22,
        (3, 1): -6 * m01 * m10**3 + 6 * m01 * m10 * m20 + 6 * m10**2 * m11
        - m01 * m30 - 3 * m10 * m21 - 3 * m11 * m20 + m31,
        (4, 0): -6 * m10**4 + 12 * m10**2 * m20 - 4 * m10 * m30 - 3 * m20**2 + m40,
    }
