"""Fixture builders and closed-form component oracles.

Bases are conformal 2-dimensional charts h = e^{2u}(dx² + dy²) carrying a
constant paracomplex structure (coordinate swap or product reflection).
The two 3-dimensional constructions over a base (N, P, h):

    cone                  g = dt² + t² h,                 φ|ker η = P, ξ = ∂t, η = dt
    hyperbolic extension  g = dt² + cosh2t·h + sinh2t·h̃,  same structure fields

with h̃(x,y) = h(x, Py).  ``oracle_expected`` returns every frame
component the constructions are known to have in closed form, as pure
arithmetic in (t, k', θ') -- no engine code on that path except the
optional ∇θ'♯ bracket, which the caller supplies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .apapr import (
    ApaprManifold3D,
    BaseManifold2D,
    nabla_along,
    theta_prime_sharp,
)
from .exprcore import ScalarField, parse_scalar_expr
from .riemann import MetricField
from .tensor import FrameData

__all__ = [
    "BASE_KINDS",
    "make_base",
    "make_cone",
    "make_hyperbolic_extension",
    "OracleTable",
    "oracle_expected",
    "theta_prime_on_frame",
    "extension_r1221_bracket",
]

BASE_KINDS = ("flat_product", "flat_swap", "round", "conformal")

_P_MATRICES = {
    "swap": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "product": np.array([[1.0, 0.0], [0.0, -1.0]]),
}

_COORDS2 = ("x", "y")
_COORDS3 = ("t", "x", "y")


def _fields2(texts) -> tuple[tuple[ScalarField, ...], ...]:
    return tuple(tuple(parse_scalar_expr(s, _COORDS2) for s in row) for row in texts)


def _fields3(texts) -> tuple[tuple[ScalarField, ...], ...]:
    return tuple(tuple(parse_scalar_expr(s, _COORDS3) for s in row) for row in texts)


def make_base(kind: str, k_prime: float | None = None, u_expr: str | None = None,
              p_kind: str | None = None) -> BaseManifold2D:
    """Build a base fixture.

    kinds: 'flat_product', 'flat_swap' (u = 0), 'round' (constant
    curvature ``k_prime`` via u = −ln(1 + k'(x²+y²)/4)), 'conformal'
    (explicit ``u_expr`` and ``p_kind``).
    """
    if kind == "flat_product":
        u_text, p_kind = "0", "product"
    elif kind == "flat_swap":
        u_text, p_kind = "0", "swap"
    elif kind == "round":
        if k_prime is None:
            raise ValueError("round base needs k_prime")
        u_text, p_kind = f"-ln(1 + {k_prime / 4.0!r}*(x^2 + y^2))", p_kind or "swap"
    elif kind == "conformal":
        if u_expr is None:
            raise ValueError("conformal base needs u_expr")
        u_text, p_kind = u_expr, p_kind or "swap"
    else:
        raise ValueError(f"unknown base kind {kind!r}; expected one of {BASE_KINDS}")

    if p_kind not in _P_MATRICES:
        raise ValueError(f"unknown p_kind {p_kind!r}; expected 'swap' or 'product'")
    u = parse_scalar_expr(u_text, _COORDS2)
    ee = f"exp(2*({u_text}))"
    h = MetricField(2, _COORDS2, _fields2(((ee, "0"), ("0", ee))))
    P = _P_MATRICES[p_kind]
    p_fields = _fields2(tuple(tuple(repr(float(v)) for v in row) for row in P))
    return BaseManifold2D(
        coords=_COORDS2, u=u, h=h, p_matrix=P, p_fields=p_fields, kind=kind, p_kind=p_kind
    )


def _structure_fields(P: np.ndarray):
    phi = np.zeros((3, 3))
    phi[1:, 1:] = P
    phi_fields = _fields3(tuple(tuple(repr(float(v)) for v in row) for row in phi))
    xi_fields = tuple(parse_scalar_expr(s, _COORDS3) for s in ("1", "0", "0"))
    eta_fields = tuple(parse_scalar_expr(s, _COORDS3) for s in ("1", "0", "0"))
    return phi_fields, xi_fields, eta_fields


def make_cone(N: BaseManifold2D) -> ApaprManifold3D:
    """Cone over the base: g = dt² + t²h on t > 0."""
    ee = f"(t^2)*exp(2*({N.u.text}))"
    g = MetricField(3, _COORDS3, _fields3((
        ("1", "0", "0"),
        ("0", ee, "0"),
        ("0", "0", ee),
    )))
    phi_fields, xi_fields, eta_fields = _structure_fields(N.p_matrix)
    return ApaprManifold3D(
        coords=_COORDS3, g=g, phi_fields=phi_fields, xi_fields=xi_fields,
        eta_fields=eta_fields, construction="cone", base=N,
    )


def make_hyperbolic_extension(N: BaseManifold2D) -> ApaprManifold3D:
    """Hyperbolic extension: g = dt² + cosh2t·h + sinh2t·h̃ on t > 0."""
    S = N.p_matrix  # h̃_ab = e^{2u} S_ab for the constant-P conformal bases
    u_text = N.u.text

    def entry(a: int, b: int) -> str:
        cosh_coef = 1.0 if a == b else 0.0
        sinh_coef = float(S[a, b])
        parts = []
        if cosh_coef:
            parts.append("cosh(2*t)")
        if sinh_coef == 1.0:
            parts.append("+ sinh(2*t)" if parts else "sinh(2*t)")
        elif sinh_coef == -1.0:
            parts.append("- sinh(2*t)")
        if not parts:
            return "0"
        return f"({' '.join(parts)})*exp(2*({u_text}))"

    g = MetricField(3, _COORDS3, _fields3((
        ("1", "0", "0"),
        ("0", entry(0, 0), entry(0, 1)),
        ("0", entry(1, 0), entry(1, 1)),
    )))
    phi_fields, xi_fields, eta_fields = _structure_fields(N.p_matrix)
    return ApaprManifold3D(
        coords=_COORDS3, g=g, phi_fields=phi_fields, xi_fields=xi_fields,
        eta_fields=eta_fields, construction="hyperbolic_extension", base=N,
    )


def theta_prime_on_frame(M: ApaprManifold3D, p, frame: FrameData) -> np.ndarray:
    """(θ'(e_1), θ'(e_2)) -- the base Lee form on the paracontact frame legs."""
    cov = np.zeros(3)
    cov[1:] = _theta_prime_cov(M.base, p)
    return np.array([frame.vectors[1] @ cov, frame.vectors[2] @ cov])


def _theta_prime_cov(N: BaseManifold2D, p3) -> np.ndarray:
    from .apapr import theta_prime_covector

    return theta_prime_covector(N, np.asarray(p3, dtype=np.float64)[1:])


def extension_r1221_bracket(M: ApaprManifold3D, p, frame: FrameData) -> float:
    """g(∇_{e1}θ'♯, e1) + g(∇_{e2}Pθ'♯, e1) for the extension's R_1221.

    θ'♯ is the h-dual of the base Lee form, lifted along the chart; its
    derivatives come from finite differences of the point-wise field while
    the connection coefficients stay exact.
    """
    N = M.base
    P = N.p_matrix

    def lift(base_vec_fn):
        def fn(q):
            out = np.zeros(3)
            out[1:] = base_vec_fn(np.asarray(q, dtype=np.float64)[1:])
            return out

        return fn

    sharp = lift(lambda q2: theta_prime_sharp(N, q2))
    p_sharp = lift(lambda q2: P @ theta_prime_sharp(N, q2))
    G = M.metric_matrix(p)
    e1, e2 = frame.vectors[1], frame.vectors[2]
    n1 = nabla_along(M, e1, sharp, p)
    n2 = nabla_along(M, e2, p_sharp, p)
    return float(n1 @ G @ e1 + n2 @ G @ e1)


@dataclass(frozen=True)
class OracleTable:
    """Closed-form frame components expected for one construction at one
    point, as functions of (t, k', θ'); pure arithmetic."""

    tag: str
    F: np.ndarray
    theta: np.ndarray
    theta_star: np.ndarray
    omega: np.ndarray
    r04: np.ndarray
    k12: float
    k01: float
    k02: float
    rho: np.ndarray
    rho_star: np.ndarray
    tau: float
    tau_star: float


def _fill_r(R: np.ndarray, i: int, j: int, k: int, l: int, v: float):
    """Set one component and everything the curvature symmetries force."""
    for (a, b, sgn1) in ((i, j, 1.0), (j, i, -1.0)):
        for (c, d, sgn2) in ((k, l, 1.0), (l, k, -1.0)):
            s = sgn1 * sgn2 * v
            R[a, b, c, d] = s
            R[c, d, a, b] = s


def oracle_expected(
    tag: str,
    t: float,
    k_prime: float,
    theta_prime=(0.0, 0.0),
    nabla_bracket: float = 0.0,
) -> OracleTable:
    """Expected frame components for 'cone' or 'hyperbolic_extension'.

    ``theta_prime`` holds (θ'(e_1), θ'(e_2)); ``nabla_bracket`` is the
    extension's g(∇_{e1}θ'♯, e1) + g(∇_{e2}Pθ'♯, e1) term (zero whenever
    the base has ∇'P = 0).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    tp1, tp2 = float(theta_prime[0]), float(theta_prime[1])
    F = np.zeros((3, 3, 3))
    F[1, 1, 1], F[1, 2, 2] = tp1, -tp1
    F[2, 2, 2], F[2, 1, 1] = tp2, -tp2
    R = np.zeros((3, 3, 3, 3))
    rho = np.zeros((3, 3))
    rho_star = np.zeros((3, 3))

    if tag == "cone":
        inv_t = 1.0 / t
        for (i, j, k) in ((1, 2, 0), (1, 0, 2), (2, 1, 0), (2, 0, 1)):
            F[i, j, k] = -inv_t
        theta = np.array([0.0, tp1, tp2])
        theta_star = np.array([-2.0 * inv_t, -tp2, -tp1])
        c = (k_prime - 1.0) * inv_t * inv_t
        _fill_r(R, 1, 2, 1, 2, -c)
        rho[1, 1] = rho[2, 2] = c
        rho_star[1, 2] = rho_star[2, 1] = -c
        return OracleTable(
            tag=tag, F=F, theta=theta, theta_star=theta_star, omega=np.zeros(3),
            r04=R, k12=c, k01=0.0, k02=0.0, rho=rho, rho_star=rho_star,
            tau=2.0 * c, tau_star=0.0,
        )

    if tag == "hyperbolic_extension":
        for (i, j, k) in ((1, 0, 1), (1, 1, 0), (2, 0, 2), (2, 2, 0)):
            F[i, j, k] = -1.0
        theta = np.array([-2.0, tp1, tp2])
        theta_star = np.array([0.0, -tp2, -tp1])
        ch, sh = np.cosh(2.0 * t), np.sinh(2.0 * t)
        # k12 from the full curvature identity of the construction:
        # the quarter-term contracts to (1/2)·sinh2t·g(e1,θ'♯)·θ'(Pe1)
        # with g(e1,θ'♯) = cosh2t·θ'_1 + sinh2t·θ'_2
        A = k_prime * ch + 1.0 + 0.5 * sh * (nabla_bracket + (ch * tp1 + sh * tp2) * tp2)
        _fill_r(R, 1, 2, 2, 1, A)
        _fill_r(R, 1, 2, 1, 0, -tp2)
        _fill_r(R, 1, 2, 2, 0, tp1)
        _fill_r(R, 0, 1, 1, 0, -1.0)
        _fill_r(R, 0, 2, 2, 0, -1.0)
        rho[0, 0] = -2.0
        rho[1, 1] = rho[2, 2] = A - 1.0
        rho[0, 1] = rho[1, 0] = tp1
        rho[0, 2] = rho[2, 0] = tp2
        rho_star[1, 2] = rho_star[2, 1] = -A
        rho_star[0, 1] = rho_star[1, 0] = -tp2
        rho_star[0, 2] = rho_star[2, 0] = -tp1
        return OracleTable(
            tag=tag, F=F, theta=theta, theta_star=theta_star, omega=np.zeros(3),
            r04=R, k12=float(A), k01=-1.0, k02=-1.0, rho=rho, rho_star=rho_star,
            tau=float(2.0 * A - 4.0), tau_star=0.0,
        )

    raise ValueError(f"unknown construction tag {tag!r}")
