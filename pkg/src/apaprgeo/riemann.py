"""Levi-Civita connection and curvature of a metric field on a chart.

All derivatives of the metric come from exact second-order jets of its
component fields, so Christoffel symbols are exact and the curvature
tensor needs no finite differencing: the first derivatives of Γ are
assembled from the metric's second derivatives.

Conventions.  R(x,y)z = ∇_x∇_y z − ∇_y∇_x z − ∇_[x,y] z, lowered as
R(x,y,z,w) = g(R(x,y)z, w).  Ricci is ρ(y,z) = g^{ij} R(e_i,y,z,e_j);
the starred variants contract the last slot through the structure
endomorphism: ρ*(y,z) = g^{ij} R(e_i,y,z,φe_j).  With these signs the
round 2-sphere of curvature k has sectional curvature +k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprcore import ScalarField, eval_jet2
from .tensor import SingularMetricError

__all__ = [
    "MetricField",
    "CurvaturePack",
    "DegeneratePlaneError",
    "christoffel",
    "christoffel_with_derivative",
    "curvature",
    "sectional",
    "pi_tensors",
    "covariant_derivative_11",
]

_PLANE_THRESHOLD = 1e-10


class DegeneratePlaneError(ValueError):
    """The requested 2-plane is degenerate for the sectional quotient."""


@dataclass(frozen=True)
class MetricField:
    """Symmetric matrix of scalar fields g_ij over a chart."""

    dim: int
    coords: tuple[str, ...]
    fields: tuple[tuple[ScalarField, ...], ...]

    def __post_init__(self):
        if len(self.fields) != self.dim or any(len(row) != self.dim for row in self.fields):
            raise ValueError(f"need a {self.dim}x{self.dim} field matrix")
        for i in range(self.dim):
            for j in range(i):
                if self.fields[i][j] != self.fields[j][i]:
                    raise ValueError("metric fields must be symmetric across the diagonal")

    def value(self, p) -> np.ndarray:
        d = self.dim
        g = np.empty((d, d))
        for i in range(d):
            for j in range(i + 1):
                g[i, j] = g[j, i] = self.fields[i][j].value(p)
        return g

    def jets(self, p):
        """(G, dG, d2G) with dG[k,i,j] = ∂_k g_ij, d2G[k,l,i,j] = ∂_k∂_l g_ij."""
        d = self.dim
        G = np.empty((d, d))
        dG = np.empty((d, d, d))
        d2G = np.empty((d, d, d, d))
        for i in range(d):
            for j in range(i + 1):
                jet = eval_jet2(self.fields[i][j], p)
                G[i, j] = G[j, i] = jet.value
                dG[:, i, j] = dG[:, j, i] = jet.gradient
                d2G[:, :, i, j] = d2G[:, :, j, i] = jet.hessian
        return G, dG, d2G


def check_positive_definite(G: np.ndarray):
    """Leading-principal-minor test; raises SingularMetricError on failure."""
    d = G.shape[0]
    for k in range(1, d + 1):
        if np.linalg.det(G[:k, :k]) <= 0.0:
            raise SingularMetricError("metric is not positive definite at the point")


def _gamma_terms(G, dG, d2G=None):
    Ginv = np.linalg.inv(G)
    # C[k,i,j] = ∂_i g_jk + ∂_j g_ik − ∂_k g_ij
    C = np.einsum("ijk->kij", dG) + np.einsum("jik->kij", dG) - dG
    gamma = 0.5 * np.einsum("mk,kij->mij", Ginv, C)
    if d2G is None:
        return Ginv, gamma, None
    dGinv = -np.einsum("ma,lab,bk->lmk", Ginv, dG, Ginv)
    dC = (
        np.einsum("lijk->lkij", d2G)
        + np.einsum("ljik->lkij", d2G)
        - np.einsum("lkij->lkij", d2G)
    )
    dgamma = 0.5 * np.einsum("lmk,kij->lmij", dGinv, C) + 0.5 * np.einsum(
        "mk,lkij->lmij", Ginv, dC
    )
    return Ginv, gamma, dgamma


def christoffel(g: MetricField, p) -> np.ndarray:
    """Christoffel symbols Γ[k,i,j] = Γ^k_ij at p (Koszul formula, exact jets)."""
    G, dG, _ = g.jets(p)
    check_positive_definite(G)
    _, gamma, _ = _gamma_terms(G, dG)
    return gamma


def christoffel_with_derivative(g: MetricField, p):
    """(Γ, ∂Γ) with ∂Γ[l,k,i,j] = ∂_l Γ^k_ij, both exact at p."""
    G, dG, d2G = g.jets(p)
    check_positive_definite(G)
    _, gamma, dgamma = _gamma_terms(G, dG, d2G)
    return gamma, dgamma


@dataclass(frozen=True)
class CurvaturePack:
    """Connection and curvature data at a point, coordinate components.

    r13[l,i,j,k] are the components of R(∂_i,∂_j)∂_k = R^l_ijk ∂_l and
    r04[i,j,k,l] = g(R(∂_i,∂_j)∂_k, ∂_l).  rho_star/tau_star are None
    when no structure endomorphism was supplied.
    """

    gamma: np.ndarray
    r13: np.ndarray
    r04: np.ndarray
    ricci: np.ndarray
    tau: float
    rho_star: np.ndarray | None = None
    tau_star: float | None = None


def curvature(g: MetricField, p, phi: np.ndarray | None = None) -> CurvaturePack:
    """Full curvature data at p; pass φ components to get ρ*, τ* as well."""
    G, dG, d2G = g.jets(p)
    check_positive_definite(G)
    Ginv, gamma, dgamma = _gamma_terms(G, dG, d2G)
    r13 = (
        np.einsum("iljk->lijk", dgamma)
        - np.einsum("jlik->lijk", dgamma)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    r04 = np.einsum("mijk,ml->ijkl", r13, G)
    ricci = np.einsum("il,ijkl->jk", Ginv, r04)
    tau = float(np.einsum("jk,jk", Ginv, ricci))
    rho_star = None
    tau_star = None
    if phi is not None:
        rho_star = np.einsum("ab,mb,ajkm->jk", Ginv, phi, r04)
        tau_star = float(np.einsum("jk,jk", Ginv, rho_star))
    return CurvaturePack(
        gamma=gamma, r13=r13, r04=r04, ricci=ricci, tau=tau, rho_star=rho_star, tau_star=tau_star
    )


def pi_tensors(G: np.ndarray, phi: np.ndarray, x, y, z, w):
    """The two curvature-like tensors evaluated on four vectors:

    π1 = g(y,z)g(x,w) − g(x,z)g(y,w)
    π2 = g(y,φz)g(φx,w) − g(x,φz)g(φy,w)
    """
    x, y, z, w = (np.asarray(v, dtype=np.float64) for v in (x, y, z, w))

    def ip(u, v):
        return u @ G @ v

    pi1 = ip(y, z) * ip(x, w) - ip(x, z) * ip(y, w)
    pz = phi @ z
    pi2 = ip(y, pz) * ip(phi @ x, w) - ip(x, pz) * ip(phi @ y, w)
    return float(pi1), float(pi2)


def sectional(r04: np.ndarray, G: np.ndarray, x, y) -> float:
    """Sectional curvature k = R(x,y,y,x) / π1(x,y,y,x) of span{x, y}."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    denom = (y @ G @ y) * (x @ G @ x) - (x @ G @ y) ** 2
    scale = (x @ G @ x) * (y @ G @ y)
    if abs(denom) <= _PLANE_THRESHOLD * max(scale, 1e-300):
        raise DegeneratePlaneError("plane is degenerate: π1(x,y,y,x) ≈ 0")
    numer = np.einsum("ijkl,i,j,k,l", r04, x, y, y, x)
    return float(numer / denom)


def covariant_derivative_11(T, g: MetricField, p) -> np.ndarray:
    """∇ of a (1,1) tensor field: D[i,k,j] = (∇_i T)^k_j.

    T is a dim x dim nested sequence of ScalarFields, T[k][j] = T^k_j.
    """
    d = g.dim
    Tm = np.empty((d, d))
    dT = np.empty((d, d, d))
    for k in range(d):
        for j in range(d):
            jet = eval_jet2(T[k][j], p)
            Tm[k, j] = jet.value
            dT[:, k, j] = jet.gradient
    gamma = christoffel(g, p)
    return (
        dT
        + np.einsum("kim,mj->ikj", gamma, Tm)
        - np.einsum("mij,km->ikj", gamma, Tm)
    )
