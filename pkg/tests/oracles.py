"""Independent finite-difference oracles for the test suite.

Everything here differentiates *values only* (plain field evaluation);
no jet arithmetic is used, so agreement with the engine checks the
analytic derivative path against a numerically independent one.
"""

import numpy as np

from apaprgeo import fd


def gamma_fd(g, p, h=fd.DEFAULT_STEP):
    """Christoffel symbols by brute-force Koszul: FD first derivatives of g."""
    p = np.asarray(p, dtype=np.float64)
    d = g.dim
    dG = np.empty((d, d, d))
    for a in range(d):
        for i in range(d):
            for j in range(i + 1):
                dG[a, i, j] = dG[a, j, i] = fd.diff1(
                    lambda q, i=i, j=j: g.fields[i][j].value(q), p, a, h
                )
    Ginv = np.linalg.inv(g.value(p))
    C = np.einsum("ijk->kij", dG) + np.einsum("jik->kij", dG) - dG
    return 0.5 * np.einsum("mk,kij->mij", Ginv, C)


def r13_fd(g, p, h=fd.DEFAULT_STEP):
    """(1,3) curvature from FD derivatives of the FD Christoffel symbols."""
    p = np.asarray(p, dtype=np.float64)
    d = g.dim
    dGam = np.empty((d, d, d, d))
    for a in range(d):
        e = np.zeros(d)
        e[a] = 1.0
        dGam[a] = (
            -gamma_fd(g, p + 2 * h * e)
            + 8 * gamma_fd(g, p + h * e)
            - 8 * gamma_fd(g, p - h * e)
            + gamma_fd(g, p - 2 * h * e)
        ) / (12 * h)
    gam = gamma_fd(g, p)
    return (
        np.einsum("iljk->lijk", dGam)
        - np.einsum("jlik->lijk", dGam)
        + np.einsum("lim,mjk->lijk", gam, gam)
        - np.einsum("ljm,mik->lijk", gam, gam)
    )


def covariant_11_fd(T, g, p, h=fd.DEFAULT_STEP):
    """FD version of the (1,1)-tensor covariant derivative."""
    p = np.asarray(p, dtype=np.float64)
    d = g.dim
    Tm = np.array([[T[k][j].value(p) for j in range(d)] for k in range(d)])
    dT = np.empty((d, d, d))
    for a in range(d):
        for k in range(d):
            for j in range(d):
                dT[a, k, j] = fd.diff1(lambda q, k=k, j=j: T[k][j].value(q), p, a, h)
    gam = gamma_fd(g, p, h)
    return dT + np.einsum("kim,mj->ikj", gam, Tm) - np.einsum("mij,km->ikj", gam, Tm)
