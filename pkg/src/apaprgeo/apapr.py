"""Structure layer: almost paracontact almost paracomplex Riemannian charts.

Holds the two manifold chart types (3-dimensional structure manifold and
2-dimensional paracomplex base), the structure-axiom validator, the
fundamental tensor F(x,y,z) = g((∇_x φ)y, z), the Lee forms, and the
associated (structure-twisted) metrics.

Lee forms follow the dimension-3 component relations: θ and θ* contract
F over the paracontact part of an orthonormal φ-basis while ω(z) =
F(ξ,ξ,z), so that θ_0 = F_110 + F_220, θ*_0 = F_120 + F_210, θ_1 = F_111
and the paired identities θ*_1 = −θ_2, θ*_2 = −θ_1 hold identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fd
from .exprcore import ScalarField
from .riemann import MetricField, christoffel, covariant_derivative_11
from .tensor import FrameData, TensorValue, adapted_pair, build_phi_basis, to_frame

__all__ = [
    "ChartDomainError",
    "BaseManifold2D",
    "ApaprManifold3D",
    "StructureValidation",
    "LeeForms",
    "validate_structure",
    "fundamental_F",
    "fundamental_F_coord",
    "lee_forms",
    "lee_forms_by_contraction",
    "associated_metric",
    "base_associated_metric",
    "base_frame",
    "base_fundamental_Fprime",
    "base_lee_theta_prime",
    "theta_prime_covector",
    "theta_prime_sharp",
    "covariant_derivative_vector_field",
    "nabla_along",
]

STRUCTURE_TOL = 1e-10


class ChartDomainError(ValueError):
    """Point lies outside the chart domain (e.g. at or below the cone apex)."""


def _eval_matrix(fields, p) -> np.ndarray:
    return np.array([[f.value(p) for f in row] for row in fields])


def _eval_vector(fields, p) -> np.ndarray:
    return np.array([f.value(p) for f in fields])


@dataclass(frozen=True)
class BaseManifold2D:
    """Conformal 2-dimensional chart h = e^{2u}(dx² + dy²) with a constant
    paracomplex structure P (P² = I, tr P = 0, h(Px,Py) = h(x,y))."""

    coords: tuple[str, str]
    u: ScalarField
    h: MetricField
    p_matrix: np.ndarray
    p_fields: tuple[tuple[ScalarField, ...], ...]
    kind: str = "custom"
    p_kind: str = "swap"

    def metric_matrix(self, p) -> np.ndarray:
        return self.h.value(p)

    def k_prime(self, p) -> float:
        """Gauss curvature of the conformal metric: k' = −e^{−2u} Δu."""
        jet = self.u.jet(p)
        return float(-np.exp(-2.0 * jet.value) * np.trace(jet.hessian))


@dataclass(frozen=True)
class ApaprManifold3D:
    """3-dimensional chart carrying (φ, ξ, η, g) over coordinates (t, x, y)."""

    coords: tuple[str, str, str]
    g: MetricField
    phi_fields: tuple[tuple[ScalarField, ...], ...]
    xi_fields: tuple[ScalarField, ...]
    eta_fields: tuple[ScalarField, ...]
    construction: str = "custom"
    base: BaseManifold2D | None = None
    t_min: float = field(default=1e-6)

    def check_point(self, p):
        p = np.asarray(p, dtype=np.float64)
        if self.construction in ("cone", "hyperbolic_extension") and p[0] <= self.t_min:
            raise ChartDomainError(
                f"t = {p[0]!r} is at or below the chart floor t_min = {self.t_min!r}"
            )
        return p

    def metric_matrix(self, p) -> np.ndarray:
        return self.g.value(p)

    def phi_matrix(self, p) -> np.ndarray:
        """φ[k, j] = component k of φ(∂_j)."""
        return _eval_matrix(self.phi_fields, p)

    def xi_vector(self, p) -> np.ndarray:
        return _eval_vector(self.xi_fields, p)

    def eta_covector(self, p) -> np.ndarray:
        return _eval_vector(self.eta_fields, p)

    def frame(self, p, orientation=(1.0, 1.0)) -> FrameData:
        return build_phi_basis(self, self.check_point(p), orientation)


@dataclass(frozen=True)
class StructureValidation:
    """Per-axiom residuals (max-norm) of the structure equations at a point."""

    residuals: dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(r < self.tolerance for r in self.residuals.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def failing(self) -> tuple[str, ...]:
        return tuple(k for k, v in self.residuals.items() if v >= self.tolerance)


def validate_structure(M: ApaprManifold3D, p, tol: float = STRUCTURE_TOL) -> StructureValidation:
    """Check the structure axioms at p; failures are reported, not raised.

    Axioms: φ² = I − η⊗ξ, η(ξ) = 1, η∘φ = 0, φξ = 0, tr φ = 0 and the
    metric compatibility g(φx, φy) = g(x, y) − η(x)η(y).
    """
    p = M.check_point(p)
    G = M.metric_matrix(p)
    phi = M.phi_matrix(p)
    xi = M.xi_vector(p)
    eta = M.eta_covector(p)
    ident = np.eye(3)
    residuals = {
        "phi_squared": np.abs(phi @ phi - (ident - np.outer(xi, eta))).max(),
        "eta_of_xi": abs(float(eta @ xi) - 1.0),
        "eta_circ_phi": np.abs(eta @ phi).max(),
        "phi_of_xi": np.abs(phi @ xi).max(),
        "trace_phi": abs(float(np.trace(phi))),
        "metric_compat": np.abs(phi.T @ G @ phi - (G - np.outer(eta, eta))).max(),
    }
    return StructureValidation({k: float(v) for k, v in residuals.items()}, tol)


def fundamental_F_coord(M: ApaprManifold3D, p) -> np.ndarray:
    """F(∂_i, ∂_j, ∂_k) = g((∇_i φ)∂_j, ∂_k) in coordinate components."""
    p = M.check_point(p)
    D = covariant_derivative_11(M.phi_fields, M.g, p)
    G = M.metric_matrix(p)
    return np.einsum("ilj,lk->ijk", D, G)


def fundamental_F(M: ApaprManifold3D, p, frame: FrameData | None = None) -> np.ndarray:
    """The fundamental tensor in the canonical φ-basis at p."""
    p = M.check_point(p)
    if frame is None:
        frame = M.frame(p)
    f_coord = fundamental_F_coord(M, p)
    return to_frame(TensorValue(3, ("l", "l", "l"), f_coord), frame).components


@dataclass(frozen=True)
class LeeForms:
    """Lee-form components in the φ-basis (index 0 is the ξ direction)."""

    theta: np.ndarray
    theta_star: np.ndarray
    omega: np.ndarray


def lee_forms(F_frame: np.ndarray) -> LeeForms:
    """Lee forms from φ-basis components of F (dimension-3 relations)."""
    theta = F_frame[1, 1, :] + F_frame[2, 2, :]
    theta_star = F_frame[1, 2, :] + F_frame[2, 1, :]
    omega = F_frame[0, 0, :].copy()
    return LeeForms(theta=theta, theta_star=theta_star, omega=omega)


def lee_forms_by_contraction(
    M: ApaprManifold3D, p, frame: FrameData, f_coord: np.ndarray | None = None
) -> LeeForms:
    """Lee forms via coordinate contractions (independent of the φ-basis).

    θ(z) = g^{ab} F(∂_a, ∂_b, z) − F(ξ, ξ, z),
    θ*(z) = g^{ab} F(∂_a, φ∂_b, z),   ω(z) = F(ξ, ξ, z),
    all pushed onto the frame afterwards.
    """
    p = M.check_point(p)
    if f_coord is None:
        f_coord = fundamental_F_coord(M, p)
    Ginv = np.linalg.inv(M.metric_matrix(p))
    phi = M.phi_matrix(p)
    xi = M.xi_vector(p)
    omega_cov = np.einsum("abc,a,b->c", f_coord, xi, xi)
    theta_cov = np.einsum("ab,abc->c", Ginv, f_coord) - omega_cov
    theta_star_cov = np.einsum("ab,mb,amc->c", Ginv, phi, f_coord)
    e = frame.vectors
    return LeeForms(theta=e @ theta_cov, theta_star=e @ theta_star_cov, omega=e @ omega_cov)


def associated_metric(M: ApaprManifold3D, p) -> np.ndarray:
    """g̃(x,y) = g(x, φy) + η(x)η(y); pseudo-Riemannian of signature (2,1)."""
    p = M.check_point(p)
    G = M.metric_matrix(p)
    eta = M.eta_covector(p)
    return G @ M.phi_matrix(p) + np.outer(eta, eta)


def base_associated_metric(N: BaseManifold2D, p) -> np.ndarray:
    """h̃(x,y) = h(x, Py); pseudo-Riemannian of signature (1,1)."""
    return N.metric_matrix(p) @ N.p_matrix


def base_frame(N: BaseManifold2D, p, orientation=(1.0, 1.0)) -> FrameData:
    """Orthonormal P-adapted base frame {ê1, ê2} with Pê1 = ê2, Pê2 = ê1."""
    H = N.metric_matrix(p)
    p_plus, p_minus = adapted_pair(H, N.p_matrix, np.eye(2), orientation)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    vectors = np.vstack([(p_plus + p_minus) * inv_sqrt2, (p_plus - p_minus) * inv_sqrt2])
    return FrameData(vectors=vectors, gram=vectors @ H @ vectors.T)


def base_fundamental_Fprime(N: BaseManifold2D, p, frame: FrameData | None = None) -> np.ndarray:
    """F'(x,y,z) = h((∇'_x P)y, z) in the P-adapted base frame."""
    if frame is None:
        frame = base_frame(N, p)
    D = covariant_derivative_11(N.p_fields, N.h, p)
    f_coord = np.einsum("ilj,lk->ijk", D, N.metric_matrix(p))
    return to_frame(TensorValue(2, ("l", "l", "l"), f_coord), frame).components


def base_lee_theta_prime(N: BaseManifold2D, p, frame: FrameData | None = None) -> np.ndarray:
    """Base Lee form θ' in the P-adapted frame: θ'_k = Σ_i F'(ê_i, ê_i, ê_k)."""
    fprime = base_fundamental_Fprime(N, p, frame)
    return fprime[0, 0, :] + fprime[1, 1, :]


def theta_prime_covector(N: BaseManifold2D, p) -> np.ndarray:
    """θ' in coordinate components: θ'_c = h^{ab} F'_abc."""
    D = covariant_derivative_11(N.p_fields, N.h, p)
    H = N.metric_matrix(p)
    f_coord = np.einsum("ilj,lk->ijk", D, H)
    return np.einsum("ab,abc->c", np.linalg.inv(H), f_coord)


def theta_prime_sharp(N: BaseManifold2D, p) -> np.ndarray:
    """h-dual vector of θ': h(θ'♯, ·) = θ'(·)."""
    return np.linalg.solve(N.metric_matrix(p), theta_prime_covector(N, p))


def covariant_derivative_vector_field(M, V_fn, p, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """∇ of a point-wise defined vector field: result[a, b] = (∇_a V)^b.

    The field has no expression form, so ∂V comes from 4th-order central
    differences of its components; Γ stays exact (jets of the metric).
    """
    p = np.asarray(p, dtype=np.float64)
    dV = fd.jacobian(V_fn, p, step)  # dV[a, b] = ∂_a V^b
    gamma = christoffel(M.g if hasattr(M, "g") else M.h, p)
    V = np.asarray(V_fn(p), dtype=np.float64)
    return dV + np.einsum("bam,m->ab", gamma, V)


def nabla_along(M, direction, V_fn, p, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """(∇_w V) at p for a coordinate-component direction w."""
    nabla = covariant_derivative_vector_field(M, V_fn, p, step)
    return np.asarray(direction, dtype=np.float64) @ nabla
