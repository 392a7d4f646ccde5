"""Chart-based curvature engine for 3-dimensional almost paracontact
almost paracomplex Riemannian manifolds built over 2-dimensional
paracomplex bases (cone metric and hyperbolic extension)."""

__version__ = "0.1.0"

from .exprcore import (
    EvalDomainError,
    Jet2,
    ParseError,
    ScalarField,
    eval_jet2,
    jet_backend_name,
    parse_scalar_expr,
    set_jet_backend,
)

__all__ = [
    "__version__",
    "EvalDomainError",
    "Jet2",
    "ParseError",
    "ScalarField",
    "eval_jet2",
    "jet_backend_name",
    "parse_scalar_expr",
    "set_jet_backend",
]
