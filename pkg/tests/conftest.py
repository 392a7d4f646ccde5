import numpy as np
import pytest

from apaprgeo import constructions as cx

BASE_KINDS = ("flat_product", "flat_swap", "conformal_x_swap", "round4")


def make_named_base(name):
    if name == "flat_product":
        return cx.make_base("flat_product")
    if name == "flat_swap":
        return cx.make_base("flat_swap")
    if name == "conformal_x_swap":
        return cx.make_base("conformal", u_expr="x", p_kind="swap")
    if name == "round4":
        return cx.make_base("round", k_prime=4.0)
    raise ValueError(name)


@pytest.fixture(scope="session")
def bases():
    return {name: make_named_base(name) for name in BASE_KINDS}


@pytest.fixture(scope="session")
def manifolds(bases):
    """All eight construction fixtures, keyed by (construction, base name)."""
    out = {}
    for name, N in bases.items():
        out[("cone", name)] = cx.make_cone(N)
        out[("hyperbolic_extension", name)] = cx.make_hyperbolic_extension(N)
    return out


def sample_points(rng, count, t_range=(0.25, 4.0), xy_box=(-0.9, 0.9)):
    """Log-uniform t, uniform (x, y); the sampling used across the suite."""
    t = np.exp(rng.uniform(np.log(t_range[0]), np.log(t_range[1]), size=count))
    xy = rng.uniform(xy_box[0], xy_box[1], size=(count, 2))
    return np.column_stack([t, xy])


def t_cap(construction):
    # extension curvature assembly loses ~e^{6t} bits to cancellation;
    # tight-tolerance suites stay where f64 has margin
    return 2.0 if construction == "hyperbolic_extension" else 4.0
