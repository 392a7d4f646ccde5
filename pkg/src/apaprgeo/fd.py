"""Fourth-order central finite-difference stencils.

Used in two places: as the independent derivative oracle in the test
suite (checking the jet arithmetic and the curvature machinery), and for
differentiating point-wise constructed fields that have no expression
form (frame fields, Lee-form duals along a chart).
"""

from __future__ import annotations

import numpy as np

DEFAULT_STEP = 1e-3


def diff1(fn, x, i: int, h: float = DEFAULT_STEP) -> float:
    """4th-order partial d(fn)/dx_i at x for scalar fn."""
    x = np.asarray(x, dtype=np.float64)
    e = np.zeros_like(x)
    e[i] = 1.0
    return (
        -fn(x + 2 * h * e) + 8 * fn(x + h * e) - 8 * fn(x - h * e) + fn(x - 2 * h * e)
    ) / (12 * h)


def diff2_diag(fn, x, i: int, h: float = DEFAULT_STEP) -> float:
    """4th-order second partial d²(fn)/dx_i² at x."""
    x = np.asarray(x, dtype=np.float64)
    e = np.zeros_like(x)
    e[i] = 1.0
    return (
        -fn(x + 2 * h * e)
        + 16 * fn(x + h * e)
        - 30 * fn(x)
        + 16 * fn(x - h * e)
        - fn(x - 2 * h * e)
    ) / (12 * h * h)


def diff2_cross(fn, x, i: int, j: int, h: float = DEFAULT_STEP) -> float:
    """4th-order mixed partial d²(fn)/dx_i dx_j (i != j), via nested diff1."""
    return diff1(lambda y: diff1(fn, y, j, h), x, i, h)


def _richardson(coarse, fine):
    return (16.0 * fine - coarse) / 15.0


def gradient(fn, x, h: float = DEFAULT_STEP, richardson: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    g = np.array([diff1(fn, x, i, h) for i in range(x.size)])
    if richardson:
        g2 = np.array([diff1(fn, x, i, h / 2) for i in range(x.size)])
        g = _richardson(g, g2)
    return g


def hessian(fn, x, h: float = DEFAULT_STEP, richardson: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = x.size

    def one(step):
        m = np.empty((n, n))
        for i in range(n):
            m[i, i] = diff2_diag(fn, x, i, step)
            for j in range(i):
                m[i, j] = m[j, i] = diff2_cross(fn, x, i, j, step)
        return m

    m = one(h)
    if richardson:
        m = _richardson(m, one(h / 2))
    return 0.5 * (m + m.T)


def jacobian(fn, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """d(fn_b)/dx_a for vector-valued fn; result[a, b] = ∂_a fn(x)[b]."""
    x = np.asarray(x, dtype=np.float64)
    f0 = np.asarray(fn(x), dtype=np.float64)
    out = np.empty((x.size,) + f0.shape)
    for a in range(x.size):
        e = np.zeros_like(x)
        e[a] = 1.0
        out[a] = (
            -np.asarray(fn(x + 2 * h * e))
            + 8 * np.asarray(fn(x + h * e))
            - 8 * np.asarray(fn(x - h * e))
            + np.asarray(fn(x - 2 * h * e))
        ) / (12 * h)
    return out
