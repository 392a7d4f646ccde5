"""Dense small-dimension tensor values with index variance.

Components are plain ndarrays of shape (dim,)*rank.  Variance is a tuple
of 'u'/'l' flags per slot.  Everything here is pure and allocation-light;
the heavy numerics live in :mod:`apaprgeo.riemann`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TensorValue",
    "FrameData",
    "VarianceError",
    "SingularMetricError",
    "FrameConstructionError",
    "contract",
    "raise_lower",
    "to_frame",
    "build_phi_basis",
    "adapted_pair",
]

_COND_LIMIT = 1e12


class VarianceError(ValueError):
    """Slot variance does not admit the requested operation."""


class SingularMetricError(ValueError):
    """Metric is singular (or numerically too ill-conditioned) at the point."""


class FrameConstructionError(ValueError):
    """The paracomplex restriction could not be diagonalized."""


@dataclass(frozen=True)
class TensorValue:
    """Tensor components at a point, with per-slot variance ('u' or 'l')."""

    dim: int
    variance: tuple[str, ...]
    components: np.ndarray

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=np.float64)
        object.__setattr__(self, "components", comp)
        if comp.shape != (self.dim,) * len(self.variance):
            raise ValueError(
                f"components shape {comp.shape} does not match rank {len(self.variance)} in dim {self.dim}"
            )
        if any(v not in ("u", "l") for v in self.variance):
            raise ValueError(f"variance flags must be 'u' or 'l': {self.variance}")

    @property
    def rank(self) -> int:
        return len(self.variance)


def contract(a: TensorValue, slot_i: int, slot_j: int) -> TensorValue:
    """Trace slot_i (upper) against slot_j (lower); rank drops by two."""
    r = a.rank
    if not (0 <= slot_i < r and 0 <= slot_j < r) or slot_i == slot_j:
        raise VarianceError(f"slots ({slot_i}, {slot_j}) out of range for rank {r}")
    if a.variance[slot_i] != "u" or a.variance[slot_j] != "l":
        raise VarianceError(
            f"contract needs (upper, lower) slots, got ({a.variance[slot_i]}, {a.variance[slot_j]})"
        )
    comp = np.trace(a.components, axis1=slot_i, axis2=slot_j)
    variance = tuple(v for k, v in enumerate(a.variance) if k not in (slot_i, slot_j))
    return TensorValue(a.dim, variance, np.asarray(comp, dtype=np.float64))


def _check_metric(g: TensorValue):
    m = g.components
    if g.rank != 2 or not np.allclose(m, m.T, rtol=1e-12, atol=1e-12):
        raise ValueError("metric must be a symmetric rank-2 tensor")
    if np.linalg.cond(m) > _COND_LIMIT:
        raise SingularMetricError(f"metric condition number exceeds {_COND_LIMIT:g}")


def raise_lower(a: TensorValue, slot: int, g: TensorValue, direction: str) -> TensorValue:
    """Raise or lower one slot with the metric g (given as (0,2) components)."""
    if not 0 <= slot < a.rank:
        raise VarianceError(f"slot {slot} out of range for rank {a.rank}")
    _check_metric(g)
    if direction == "raise":
        if a.variance[slot] != "l":
            raise VarianceError("raise expects a lower slot")
        matrix = np.linalg.inv(g.components)
        new_flag = "u"
    elif direction == "lower":
        if a.variance[slot] != "u":
            raise VarianceError("lower expects an upper slot")
        matrix = g.components
        new_flag = "l"
    else:
        raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")
    comp = np.tensordot(a.components, matrix, axes=([slot], [0]))
    comp = np.moveaxis(comp, -1, slot)
    variance = tuple(new_flag if k == slot else v for k, v in enumerate(a.variance))
    return TensorValue(a.dim, variance, comp)


@dataclass(frozen=True)
class FrameData:
    """Orthonormal frame at a point: rows of ``vectors`` are the frame
    vectors in coordinate components; ``gram`` is their inner-product
    matrix under the metric used to build them."""

    vectors: np.ndarray
    gram: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def to_frame(a: TensorValue, frame: FrameData) -> TensorValue:
    """Express a tensor in frame components (multilinear change of basis).

    Lower slots contract with the frame vectors; upper slots with the dual
    coframe.  Scalars pass through unchanged.
    """
    if a.rank == 0:
        return a
    e = frame.vectors
    coframe = np.linalg.inv(e.T)  # rows are the dual covectors
    comp = a.components
    for slot, flag in enumerate(a.variance):
        mat = e if flag == "l" else coframe
        comp = np.moveaxis(np.tensordot(mat, comp, axes=([1], [slot])), 0, slot)
    return TensorValue(a.dim, a.variance, comp)


def _eigenvector_2x2(m: np.ndarray, sign: float) -> np.ndarray:
    """Eigenvector of a 2x2 matrix for eigenvalue ±1, picked deterministically."""
    a, b = m[0]
    c, d = m[1]
    if sign > 0:
        cand = (np.array([b, 1.0 - a]), np.array([1.0 - d, c]))
    else:
        cand = (np.array([b, -(1.0 + a)]), np.array([1.0 + d, -c]))
    v1, v2 = cand
    v = v1 if np.dot(v1, v1) >= np.dot(v2, v2) else v2
    if np.dot(v, v) < 1e-24:
        raise FrameConstructionError("degenerate paracomplex restriction (no ±1 eigenvector)")
    return v


def _fix_sign(v: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(v))
    for comp in v:
        if abs(comp) > 1e-12 * scale:
            return -v if comp < 0 else v
    return v


def adapted_pair(gram, restriction, basis, orientation=(1.0, 1.0)):
    """Unit ±1-eigenvectors of a paracomplex restriction, sign-normalized.

    ``restriction`` is the 2x2 matrix of P on span(``basis``) (rows of
    ``basis`` are ambient coordinate vectors); ``gram`` is the ambient
    metric.  Returns (p_plus, p_minus) in ambient components, unit length,
    first significant component positive, then scaled by ``orientation``.
    """
    basis = np.asarray(basis, dtype=np.float64)
    out = []
    for sign, orient in zip((1.0, -1.0), orientation):
        coeff = _eigenvector_2x2(restriction, sign)
        vec = coeff @ basis
        norm2 = vec @ gram @ vec
        if norm2 <= 0:
            raise FrameConstructionError("eigenvector has non-positive metric norm")
        vec = _fix_sign(vec / np.sqrt(norm2))
        out.append(orient * vec)
    return out[0], out[1]


def build_phi_basis(manifold, p, orientation=(1.0, 1.0)) -> FrameData:
    """Canonical orthonormal frame {ξ, e1, e2} with φe1 = e2, φe2 = e1.

    Diagonalizes the restriction of φ to ker η (eigenvalues ±1), unit-
    normalizes the eigenvectors with a deterministic sign convention, and
    combines them so that φ swaps e1 and e2.  Deterministic: repeated
    calls return bitwise-identical frames.
    """
    p = np.asarray(p, dtype=np.float64)
    g = manifold.metric_matrix(p)
    phi = manifold.phi_matrix(p)
    xi = manifold.xi_vector(p)
    eta = manifold.eta_covector(p)

    dim = g.shape[0]
    # basis of ker η: project coordinate directions along ξ, keep the two
    # with the largest metric norm
    candidates = []
    for a in range(dim):
        v = np.zeros(dim)
        v[a] = 1.0
        v = v - eta[a] * xi
        candidates.append((v @ g @ v, a, v))
    candidates.sort(key=lambda item: (-item[0], item[1]))
    basis = np.array([candidates[0][2], candidates[1][2]])

    # restriction of φ to ker η in that basis: φ b_i = C[j, i] b_j
    phi_b = (phi @ basis.T).T
    restriction, *_ = np.linalg.lstsq(basis.T, phi_b.T, rcond=None)
    p_plus, p_minus = adapted_pair(g, restriction, basis, orientation)

    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    e1 = (p_plus + p_minus) * inv_sqrt2
    e2 = (p_plus - p_minus) * inv_sqrt2
    vectors = np.vstack([xi, e1, e2])
    gram = vectors @ g @ vectors.T
    return FrameData(vectors=vectors, gram=gram)
