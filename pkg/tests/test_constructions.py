import numpy as np
import pytest

from apaprgeo import constructions as cx
from apaprgeo.apapr import (
    associated_metric,
    base_frame,
    fundamental_F,
    lee_forms,
    validate_structure,
)
from apaprgeo.riemann import curvature, sectional
from apaprgeo.tensor import TensorValue, to_frame
from conftest import sample_points, t_cap


def frame_tables(M, p):
    """Everything the oracle pins, computed by the engine in the frame."""
    frame = M.frame(p)
    pack = curvature(M.g, p, phi=M.phi_matrix(p))
    r04 = to_frame(TensorValue(3, ("l",) * 4, pack.r04), frame).components
    rho = to_frame(TensorValue(3, ("l", "l"), pack.ricci), frame).components
    rho_star = to_frame(TensorValue(3, ("l", "l"), pack.rho_star), frame).components
    G = M.g.value(p)
    e = frame.vectors
    k = {
        (0, 1): sectional(pack.r04, G, e[0], e[1]),
        (0, 2): sectional(pack.r04, G, e[0], e[2]),
        (1, 2): sectional(pack.r04, G, e[1], e[2]),
    }
    return frame, pack, r04, rho, rho_star, k


# --- bases ---------------------------------------------------------------------


def test_base_invariants(bases):
    rng = np.random.default_rng(131)
    for N in bases.values():
        P = N.p_matrix
        assert np.abs(P @ P - np.eye(2)).max() == 0.0
        assert np.trace(P) == 0.0
        for _ in range(10):
            p = rng.uniform(-0.8, 0.8, 2)
            H = N.metric_matrix(p)
            assert np.abs(P.T @ H @ P - H).max() < 1e-12


def test_flat_product_base_trivia(bases):
    N = bases["flat_product"]
    assert N.k_prime((0.3, -0.5)) == 0.0


def test_round4_curvature_engine_vs_formula():
    N = cx.make_base("round", k_prime=4.0)
    rng = np.random.default_rng(137)
    for _ in range(50):
        p = rng.uniform(-0.7, 0.7, 2)
        assert N.k_prime(p) == pytest.approx(4.0, abs=1e-10)
        pack = curvature(N.h, p)
        k_engine = sectional(pack.r04, N.h.value(p), (1.0, 0.0), (0.0, 1.0))
        assert k_engine == pytest.approx(4.0, abs=1e-6)


def test_round_negative_curvature_chart():
    N = cx.make_base("round", k_prime=-1.0)
    p = (0.4, 0.2)
    pack = curvature(N.h, p)
    k_engine = sectional(pack.r04, N.h.value(p), (1.0, 0.0), (0.0, 1.0))
    assert k_engine == pytest.approx(-1.0, abs=1e-8)
    assert N.k_prime(p) == pytest.approx(-1.0, abs=1e-10)


def test_conformal_x_harmonic_but_not_w0(bases):
    N = bases["conformal_x_swap"]
    rng = np.random.default_rng(139)
    from apaprgeo.apapr import theta_prime_covector

    for _ in range(10):
        p = rng.uniform(-0.8, 0.8, 2)
        assert N.k_prime(p) == pytest.approx(0.0, abs=1e-12)
        pack = curvature(N.h, p)
        assert sectional(pack.r04, N.h.value(p), (1.0, 0.0), (0.0, 1.0)) == pytest.approx(
            0.0, abs=1e-10
        )
        assert np.abs(theta_prime_covector(N, p)).max() > 1.9


def test_make_base_validation():
    with pytest.raises(ValueError, match="k_prime"):
        cx.make_base("round")
    with pytest.raises(ValueError, match="u_expr"):
        cx.make_base("conformal")
    with pytest.raises(ValueError, match="unknown base kind"):
        cx.make_base("torus")
    with pytest.raises(ValueError, match="p_kind"):
        cx.make_base("conformal", u_expr="x", p_kind="diag")


# --- cone ----------------------------------------------------------------------


def test_cone_frame_h_components(manifolds):
    # base metric seen through the frame legs: h_11 = h_22 = 1/t²
    M = manifolds[("cone", "round4")]
    N = M.base
    p = (2.0, 0.3, 0.15)
    frame = M.frame(p)
    H = N.h.value(p[1:])
    h11 = frame.vectors[1][1:] @ H @ frame.vectors[1][1:]
    h22 = frame.vectors[2][1:] @ H @ frame.vectors[2][1:]
    assert h11 == pytest.approx(0.25, abs=1e-12)
    assert h22 == pytest.approx(0.25, abs=1e-12)


def test_cone_over_round1_is_flat():
    M = cx.make_cone(cx.make_base("round", k_prime=1.0))
    rng = np.random.default_rng(149)
    for p in sample_points(rng, 10):
        assert np.abs(curvature(M.g, p).r04).max() < 1e-8


def test_cone_flat_product_r1212_at_unit_t(manifolds):
    M = manifolds[("cone", "flat_product")]
    _, _, r04, *_ = frame_tables(M, (1.0, 0.2, 0.5))
    assert r04[1, 2, 1, 2] == pytest.approx(1.0, abs=1e-10)


# --- hyperbolic extension ---------------------------------------------------------


def test_extension_frame_h_components(manifolds):
    # h_11 = h_22 = cosh2t, h_12 = −sinh2t in the canonical frame
    M = manifolds[("hyperbolic_extension", "conformal_x_swap")]
    N = M.base
    p = (0.9, 0.2, -0.3)
    frame = M.frame(p)
    H = N.h.value(p[1:])
    legs = frame.vectors[1:, 1:]
    hf = legs @ H @ legs.T
    assert hf[0, 0] == pytest.approx(np.cosh(1.8), abs=1e-10)
    assert hf[1, 1] == pytest.approx(np.cosh(1.8), abs=1e-10)
    assert hf[0, 1] == pytest.approx(-np.sinh(1.8), abs=1e-10)


def test_extension_flat_product_headline_numbers(manifolds):
    M = manifolds[("hyperbolic_extension", "flat_product")]
    p = (1.1, 0.4, 0.2)
    _, pack, r04, rho, _, k = frame_tables(M, p)
    assert rho[0, 0] == pytest.approx(-2.0, abs=1e-9)
    assert pack.tau == pytest.approx(-2.0, abs=1e-9)
    assert r04[1, 2, 2, 1] == pytest.approx(1.0, abs=1e-9)
    assert k[(0, 1)] == pytest.approx(-1.0, abs=1e-9)
    assert k[(0, 2)] == pytest.approx(-1.0, abs=1e-9)


def test_extension_conformal_r_theta_components(manifolds):
    M = manifolds[("hyperbolic_extension", "conformal_x_swap")]
    rng = np.random.default_rng(151)
    for p in sample_points(rng, 8, t_range=(0.25, 2.0)):
        frame, _, r04, *_ = frame_tables(M, p)
        tp = cx.theta_prime_on_frame(M, p, frame)
        assert r04[1, 2, 1, 0] == pytest.approx(-tp[1], abs=1e-6)
        assert r04[1, 2, 2, 0] == pytest.approx(tp[0], abs=1e-6)


# --- oracle tables -----------------------------------------------------------------


def test_oracle_pure_arithmetic_rows():
    row = cx.oracle_expected("cone", 2.0, 4.0)
    assert row.tau == pytest.approx(1.5)
    assert row.tau_star == 0.0
    assert row.k01 == 0.0 and row.k02 == 0.0
    row = cx.oracle_expected("hyperbolic_extension", 1.7, 0.0)
    assert row.tau == pytest.approx(-2.0)
    assert row.theta[0] == -2.0
    with pytest.raises(ValueError):
        cx.oracle_expected("cone", -1.0, 0.0)
    with pytest.raises(ValueError):
        cx.oracle_expected("moebius", 1.0, 0.0)


def test_oracle_extension_rho_form_matches_thm_shape():
    # ρ = k'cosh2t·g − (2 + k'cosh2t)·η⊗η for a parallel base structure
    for t in (0.3, 0.9, 1.6):
        for kp in (0.0, 2.5, -1.0):
            row = cx.oracle_expected("hyperbolic_extension", t, kp)
            a = kp * np.cosh(2 * t)
            expected = a * np.eye(3)
            expected[0, 0] = a - (2.0 + a)
            assert np.abs(row.rho - expected).max() < 1e-12


def test_oracle_corollary_branches_arithmetic():
    # τ = 2(k'cosh2t − 1); sign branches as stated, over a t grid
    ts = np.linspace(0.05, 3.0, 40)
    for kp in (-2.0, -0.5):
        tau = 2 * (kp * np.cosh(2 * ts) - 1.0)
        assert np.all(tau <= 2 * (kp - 1.0)) and 2 * (kp - 1.0) < -2.0
    for kp in (0.5, 2.0):
        tau = 2 * (kp * np.cosh(2 * ts) - 1.0)
        assert np.all(tau >= 2 * (kp - 1.0)) and 2 * (kp - 1.0) > -2.0
    assert np.all(2 * (0.0 * np.cosh(2 * ts) - 1.0) == -2.0)


@pytest.mark.parametrize("tag", ["cone", "hyperbolic_extension"])
@pytest.mark.parametrize("base_name", ["flat_product", "flat_swap", "conformal_x_swap", "round4"])
def test_oracle_agreement_sweep(manifolds, tag, base_name):
    """Engine vs closed-form tables on 20 random points per fixture."""
    M = manifolds[(tag, base_name)]
    N = M.base
    rng = np.random.default_rng(157)
    for p in sample_points(rng, 20, t_range=(0.25, t_cap(tag))):
        frame, pack, r04, rho, rho_star, k = frame_tables(M, p)
        F = fundamental_F(M, p, frame)
        lee = lee_forms(F)
        tp = cx.theta_prime_on_frame(M, p, frame)
        bracket = (
            cx.extension_r1221_bracket(M, p, frame)
            if tag == "hyperbolic_extension"
            else 0.0
        )
        row = cx.oracle_expected(tag, p[0], N.k_prime(p[1:]), tp, bracket)
        assert np.abs(F - row.F).max() < 1e-6
        assert np.abs(lee.theta - row.theta).max() < 1e-6
        assert np.abs(lee.theta_star - row.theta_star).max() < 1e-6
        assert np.abs(lee.omega - row.omega).max() < 1e-6
        assert np.abs(r04 - row.r04).max() < 1e-6
        assert abs(k[(0, 1)] - row.k01) < 1e-6
        assert abs(k[(0, 2)] - row.k02) < 1e-6
        assert abs(k[(1, 2)] - row.k12) < 1e-6
        assert np.abs(rho - row.rho).max() < 1e-6
        assert np.abs(rho_star - row.rho_star).max() < 1e-6
        assert abs(pack.tau - row.tau) < 1e-6
        assert abs(pack.tau_star - row.tau_star) < 1e-6


def test_cone_mixed_curvature_components_vanish(manifolds):
    # every frame component of R with a ξ slot is zero on the cone
    rng = np.random.default_rng(159)
    for base_name in ("flat_swap", "conformal_x_swap", "round4"):
        M = manifolds[("cone", base_name)]
        for p in sample_points(rng, 8):
            _, _, r04, *_ = frame_tables(M, p)
            for axis in range(4):
                assert np.abs(np.take(r04, 0, axis=axis)).max() < 1e-8


def test_extension_xi_slot_curvature(manifolds):
    # R(ξ, y', z', ξ) = −g(y', z') in the frame: R[0, i, j, 0] = −δ_ij
    rng = np.random.default_rng(161)
    for base_name in ("flat_product", "conformal_x_swap", "round4"):
        M = manifolds[("hyperbolic_extension", base_name)]
        for p in sample_points(rng, 8, t_range=(0.25, 2.0)):
            _, _, r04, *_ = frame_tables(M, p)
            for i in (1, 2):
                for j in (1, 2):
                    expected = -1.0 if i == j else 0.0
                    assert r04[0, i, j, 0] == pytest.approx(expected, abs=1e-8)


def test_star_scalar_flatness_everywhere(manifolds):
    rng = np.random.default_rng(163)
    for (tag, _), M in manifolds.items():
        for p in sample_points(rng, 10, t_range=(0.25, t_cap(tag))):
            pack = curvature(M.g, p, phi=M.phi_matrix(p))
            assert abs(pack.tau_star) < 1e-6


def test_rho_star_pairs_with_r1221(manifolds):
    # ρ*_12 = −R_1221 on both constructions
    rng = np.random.default_rng(167)
    for (tag, _), M in manifolds.items():
        for p in sample_points(rng, 5, t_range=(0.25, t_cap(tag))):
            _, _, r04, _, rho_star, _ = frame_tables(M, p)
            assert rho_star[1, 2] == pytest.approx(-r04[1, 2, 2, 1], abs=1e-8)


def test_para_eta_einstein_flag(manifolds):
    # extension over a parallel base: ρ = k'cosh2t·g − (2+k'cosh2t)η⊗η; k'=0 here
    for base_name, expected_flag in (("flat_product", True), ("flat_swap", True), ("conformal_x_swap", False)):
        M = manifolds[("hyperbolic_extension", base_name)]
        p = (0.8, 0.25, -0.4)
        frame, pack, _, rho, _, _ = frame_tables(M, p)
        eta_frame = np.zeros(3)
        eta_frame[0] = 1.0
        residual = np.abs(rho - (0.0 * np.eye(3) - 2.0 * np.outer(eta_frame, eta_frame))).max()
        assert (residual < 1e-8) == expected_flag


def test_cone_tau_sign_tracks_base_curvature():
    # τ = 2(k'−1)/t²: negative below unit base curvature, positive above
    rng = np.random.default_rng(179)
    for k_prime, sign in ((0.0, -1.0), (4.0, 1.0)):
        M = cx.make_cone(cx.make_base("round", k_prime=k_prime))
        for p in sample_points(rng, 10):
            tau = curvature(M.g, p).tau
            assert sign * tau > 0.0
    M = cx.make_cone(cx.make_base("round", k_prime=1.0))
    for p in sample_points(rng, 10):
        assert abs(curvature(M.g, p).tau) < 1e-8


def test_validate_structure_both_constructions_all_bases(manifolds):
    for M in manifolds.values():
        assert validate_structure(M, (1.0, 0.2, -0.2)).passed


def test_associated_metric_xi_normalization(manifolds):
    M = manifolds[("cone", "flat_swap")]
    p = (1.7, 0.0, 0.0)
    gt = associated_metric(M, p)
    xi = M.xi_vector(p)
    assert xi @ gt @ xi == pytest.approx(1.0, abs=1e-14)


def test_base_frame_p_adapted(bases):
    rng = np.random.default_rng(173)
    for N in bases.values():
        for _ in range(5):
            p = rng.uniform(-0.7, 0.7, 2)
            frame = base_frame(N, p)
            assert np.abs(frame.gram - np.eye(2)).max() < 1e-12
            assert np.abs(N.p_matrix @ frame.vectors[0] - frame.vectors[1]).max() < 1e-12
            assert np.abs(N.p_matrix @ frame.vectors[1] - frame.vectors[0]).max() < 1e-12
