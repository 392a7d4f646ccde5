import numpy as np
import pytest

from apaprgeo import constructions as cx
from apaprgeo.riemann import curvature
from apaprgeo.tensor import (
    FrameConstructionError,
    FrameData,
    SingularMetricError,
    TensorValue,
    VarianceError,
    build_phi_basis,
    contract,
    raise_lower,
    to_frame,
)
from conftest import sample_points, t_cap


def test_contract_identity_gives_dimension():
    ident = TensorValue(3, ("u", "l"), np.eye(3))
    out = contract(ident, 0, 1)
    assert out.rank == 0
    assert out.components == pytest.approx(3.0)


def test_contract_metric_with_inverse():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 3))
    g = a @ a.T + 3 * np.eye(3)
    prod = np.einsum("ik,kj->ij", np.linalg.inv(g), g)
    t = TensorValue(3, ("u", "l"), prod)
    assert np.abs(t.components - np.eye(3)).max() < 1e-12


def test_contract_variance_checks():
    t = TensorValue(3, ("l", "l"), np.eye(3))
    with pytest.raises(VarianceError):
        contract(t, 0, 1)
    with pytest.raises(VarianceError):
        contract(TensorValue(3, ("u", "l"), np.eye(3)), 0, 3)


def test_trace_of_phi_vanishes_on_fixtures(manifolds):
    for M in manifolds.values():
        phi = TensorValue(3, ("u", "l"), M.phi_matrix((1.0, 0.1, 0.2)))
        assert abs(float(contract(phi, 0, 1).components)) < 1e-14


def test_lower_identity_with_euclidean_metric():
    ident = TensorValue(2, ("u", "l"), np.eye(2))
    g = TensorValue(2, ("l", "l"), np.eye(2))
    lowered = raise_lower(ident, 0, g, "lower")
    assert lowered.variance == ("l", "l")
    assert np.array_equal(lowered.components, np.eye(2))


def test_raise_eta_on_cone_gives_xi(manifolds):
    M = manifolds[("cone", "round4")]
    p = (1.5, 0.2, -0.3)
    eta = TensorValue(3, ("l",), M.eta_covector(p))
    g = TensorValue(3, ("l", "l"), M.metric_matrix(p))
    xi = raise_lower(eta, 0, g, "raise")
    assert np.abs(xi.components - M.xi_vector(p)).max() < 1e-12


def test_raise_then_lower_roundtrip():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 3))
    g = TensorValue(3, ("l", "l"), a @ a.T + 3 * np.eye(3))
    t = TensorValue(3, ("l", "l", "l"), rng.normal(size=(3, 3, 3)))
    back = raise_lower(raise_lower(t, 1, g, "raise"), 1, g, "lower")
    assert np.abs(back.components - t.components).max() < 1e-12


def test_theta_prime_sharp_matches_direct_solve(bases):
    from apaprgeo.apapr import theta_prime_covector, theta_prime_sharp

    N = bases["conformal_x_swap"]
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = rng.uniform(-0.8, 0.8, 2)
        cov = theta_prime_covector(N, p)
        sharp = theta_prime_sharp(N, p)
        H = N.metric_matrix(p)
        assert np.abs(H @ sharp - cov).max() < 1e-12
        t = TensorValue(2, ("l",), cov)
        g = TensorValue(2, ("l", "l"), H)
        assert np.abs(raise_lower(t, 0, g, "raise").components - sharp).max() < 1e-12


def test_raise_lower_rejects_singular_metric():
    g = TensorValue(2, ("l", "l"), np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]))
    t = TensorValue(2, ("l",), np.ones(2))
    with pytest.raises(SingularMetricError):
        raise_lower(t, 0, g, "raise")


# --- to_frame ----------------------------------------------------------------


def test_cone_metric_in_phi_basis_is_identity(manifolds):
    M = manifolds[("cone", "round4")]
    p = (2.0, 0.3, 0.1)
    frame = M.frame(p)
    g = TensorValue(3, ("l", "l"), M.metric_matrix(p))
    assert np.abs(to_frame(g, frame).components - np.eye(3)).max() < 1e-12


def test_scalar_passes_through():
    frame = FrameData(vectors=np.eye(3), gram=np.eye(3))
    s = TensorValue(3, (), np.asarray(2.5))
    assert to_frame(s, frame) is s


def test_frame_r1212_flat_base_cone(manifolds):
    M = manifolds[("cone", "flat_product")]
    p = (2.0, 0.4, -0.2)
    frame = M.frame(p)
    pack = curvature(M.g, p)
    r = to_frame(TensorValue(3, ("l",) * 4, pack.r04), frame).components
    assert r[1, 2, 1, 2] == pytest.approx(0.25, abs=1e-10)


def test_to_frame_mixed_tensor_agrees_with_vector_action(manifolds):
    M = manifolds[("hyperbolic_extension", "round4")]
    p = (0.8, 0.1, 0.6)
    frame = M.frame(p)
    phi = M.phi_matrix(p)
    phi_f = to_frame(TensorValue(3, ("u", "l"), phi), frame).components
    # φ-basis action: φe0 = 0, φe1 = e2, φe2 = e1
    expected = np.zeros((3, 3))
    expected[2, 1] = expected[1, 2] = 1.0
    assert np.abs(phi_f - expected).max() < 1e-10


def test_to_frame_commutes_with_contraction(manifolds):
    rng = np.random.default_rng(3)
    M = manifolds[("hyperbolic_extension", "conformal_x_swap")]
    for _ in range(5):
        p = np.array([rng.uniform(0.3, 2.0), rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)])
        frame = M.frame(p)
        t = TensorValue(3, ("u", "l", "l"), rng.normal(size=(3, 3, 3)))
        direct = contract(t, 0, 1).components
        framed = contract(to_frame(t, frame), 0, 1).components
        pushed = to_frame(TensorValue(3, ("l",), direct), frame).components
        assert np.abs(framed - pushed).max() < 1e-10


# --- φ-basis construction ------------------------------------------------------


def _frame_residuals(M, p, frame):
    g = M.metric_matrix(p)
    phi = M.phi_matrix(p)
    eta = M.eta_covector(p)
    e0, e1, e2 = frame.vectors
    return {
        "gram": np.abs(frame.vectors @ g @ frame.vectors.T - np.eye(3)).max(),
        "phi_e0": np.abs(phi @ e0).max(),
        "phi_e1": np.abs(phi @ e1 - e2).max(),
        "phi_e2": np.abs(phi @ e2 - e1).max(),
        "eta_e0": abs(eta @ e0 - 1.0),
        "eta_12": max(abs(eta @ e1), abs(eta @ e2)),
    }


def test_flat_cone_frame_is_coordinate_aligned(manifolds):
    M = manifolds[("cone", "flat_swap")]
    frame = M.frame((1.0, 0.0, 0.0))
    assert np.abs(frame.vectors[0] - [1, 0, 0]).max() < 1e-14
    assert np.abs(frame.vectors[1] - [0, 1, 0]).max() < 1e-14
    assert np.abs(frame.vectors[2] - [0, 0, 1]).max() < 1e-14
    assert np.abs(frame.gram - np.eye(3)).max() < 1e-14


def test_extension_frame_constant_structure(manifolds):
    M = manifolds[("hyperbolic_extension", "flat_product")]
    p = (0.9, 0.2, -0.5)
    res = _frame_residuals(M, p, M.frame(p))
    assert max(res.values()) < 1e-12


@pytest.mark.parametrize("base_name", ["flat_product", "flat_swap", "conformal_x_swap", "round4"])
@pytest.mark.parametrize("tag", ["cone", "hyperbolic_extension"])
def test_frame_invariants_on_100_random_points(manifolds, tag, base_name):
    M = manifolds[(tag, base_name)]
    rng = np.random.default_rng(42)
    pts = sample_points(rng, 100, t_range=(0.25, t_cap(tag)))
    for p in pts:
        res = _frame_residuals(M, p, M.frame(p))
        assert max(res.values()) < 1e-10, (p, res)


def test_frame_determinism_bitwise(manifolds):
    M = manifolds[("hyperbolic_extension", "round4")]
    p = (1.3, 0.25, -0.65)
    a = M.frame(p)
    b = M.frame(p)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.gram, b.gram)


def test_frame_orientation_flip_is_still_a_phi_basis(manifolds):
    M = manifolds[("cone", "conformal_x_swap")]
    p = (1.1, 0.3, 0.2)
    for orientation in ((-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)):
        res = _frame_residuals(M, p, M.frame(p, orientation))
        assert max(res.values()) < 1e-10


def test_degenerate_restriction_raises():
    from apaprgeo.tensor import _eigenvector_2x2

    with pytest.raises(FrameConstructionError):
        _eigenvector_2x2(np.eye(2), 1.0)  # +1 eigenspace is everything
    with pytest.raises(FrameConstructionError):
        _eigenvector_2x2(-np.eye(2), -1.0)


def test_build_phi_basis_accepts_manifold_protocol(manifolds):
    M = manifolds[("cone", "flat_product")]
    frame = build_phi_basis(M, (1.0, 0.0, 0.0))
    assert np.abs(frame.gram - np.eye(3)).max() < 1e-12
