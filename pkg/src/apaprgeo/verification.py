"""Verification runs over a JSON manifold specification.

The wire format (see docs/manifold-spec.schema.json)::

    {
      "construction": "cone" | "hyperbolic_extension",
      "base": {"kind": "flat_product" | "flat_swap" | "round" | "conformal",
               "k_prime": <real>, "u": "<expression>", "p_kind": "swap" | "product"},
      "points": [[t, x, y], ...]            # exactly one of points / sampling
      "sampling": {"count": <int>, "seed": <int>,
                   "t_range": [lo, hi], "xy_box": [lo, hi]},
      "tolerances": {"structure": p, "class": p, "curvature": p}
    }

Per-point records carry every frame component the engine computes;
theorem checks aggregate residuals against the closed-form tables and
decide pass/fail at the spec's tolerances.  Reports are deterministic
functions of (spec, seed, version): sampling uses a seeded PCG64
generator and records are assembled in point order.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, constructions as cx
from .apapr import fundamental_F, lee_forms, validate_structure
from .classify import CLASS_NAMES, decompose, w0_check
from .exprcore import ParseError, jet_backend_name, parse_scalar_expr
from .riemann import curvature, sectional
from .tensor import TensorValue, to_frame

__all__ = [
    "SpecError",
    "Tolerances",
    "ManifoldSpec",
    "load_spec",
    "parse_spec_dict",
    "spec_points",
    "build_manifold",
    "run_verification",
    "classify_at_point",
    "curvature_grid",
    "report_to_json",
    "report_to_csv",
    "curvature_rows_to_csv",
    "CSV_COLUMNS",
    "CURVATURE_CSV_COLUMNS",
]

DEFAULT_SEED = 42
DEFAULT_T_RANGE = (0.25, 4.0)
DEFAULT_XY_BOX = (-0.9, 0.9)


class SpecError(ValueError):
    """Manifold specification is malformed."""


@dataclass(frozen=True)
class Tolerances:
    structure: float = 1e-10
    cls: float = 1e-8
    curvature: float = 1e-6

    def as_dict(self):
        return {"structure": self.structure, "class": self.cls, "curvature": self.curvature}


@dataclass(frozen=True)
class ManifoldSpec:
    construction: str
    base_kind: str
    k_prime: float | None = None
    u_expr: str | None = None
    p_kind: str | None = None
    points: tuple | None = None
    count: int = 100
    seed: int = DEFAULT_SEED
    t_range: tuple[float, float] = DEFAULT_T_RANGE
    xy_box: tuple[float, float] = DEFAULT_XY_BOX
    tolerances: Tolerances = field(default_factory=Tolerances)
    sha256: str = ""

    def base_summary(self):
        out = {"kind": self.base_kind}
        if self.k_prime is not None:
            out["k_prime"] = self.k_prime
        if self.u_expr is not None:
            out["u"] = self.u_expr
        if self.p_kind is not None:
            out["p_kind"] = self.p_kind
        return out


def _require(condition, message):
    if not condition:
        raise SpecError(message)


def parse_spec_dict(data: dict, sha256: str = "", tol_overrides: dict | None = None) -> ManifoldSpec:
    _require(isinstance(data, dict), "spec must be a JSON object")
    construction = data.get("construction")
    _require(
        construction in ("cone", "hyperbolic_extension"),
        f"construction must be 'cone' or 'hyperbolic_extension', got {construction!r}",
    )
    base = data.get("base")
    _require(isinstance(base, dict), "base must be an object")
    kind = base.get("kind")
    _require(kind in cx.BASE_KINDS, f"base.kind must be one of {cx.BASE_KINDS}, got {kind!r}")
    k_prime = base.get("k_prime")
    u_expr = base.get("u")
    p_kind = base.get("p_kind")
    if kind == "round":
        _require(isinstance(k_prime, (int, float)), "round base needs a numeric base.k_prime")
    if kind == "conformal":
        _require(isinstance(u_expr, str) and u_expr.strip(), "conformal base needs base.u")
        try:
            parse_scalar_expr(u_expr, ("x", "y"))
        except ParseError as err:
            raise SpecError(f"base.u does not parse: {err}") from err
    if p_kind is not None:
        _require(p_kind in ("swap", "product"), f"base.p_kind must be 'swap' or 'product', got {p_kind!r}")

    has_points = "points" in data
    has_sampling = "sampling" in data
    _require(
        has_points != has_sampling,
        "exactly one of 'points' and 'sampling' must be present",
    )

    points = None
    count, seed = 100, DEFAULT_SEED
    t_range, xy_box = DEFAULT_T_RANGE, DEFAULT_XY_BOX
    if has_points:
        raw = data["points"]
        _require(isinstance(raw, list) and raw, "points must be a non-empty list")
        cleaned = []
        for i, row in enumerate(raw):
            _require(
                isinstance(row, list) and len(row) == 3,
                f"points[{i}] must be a [t, x, y] triple",
            )
            t, x, y = (float(v) for v in row)
            _require(t > 0.0, f"points[{i}] has non-positive t")
            cleaned.append((t, x, y))
        points = tuple(cleaned)
    else:
        sampling = data["sampling"]
        _require(isinstance(sampling, dict), "sampling must be an object")
        count = sampling.get("count", 100)
        _require(isinstance(count, int) and count > 0, "empty sample: sampling.count must be >= 1")
        seed = sampling.get("seed", DEFAULT_SEED)
        _require(isinstance(seed, int), "sampling.seed must be an integer")
        t_range = tuple(float(v) for v in sampling.get("t_range", DEFAULT_T_RANGE))
        _require(
            len(t_range) == 2 and 0.0 < t_range[0] < t_range[1],
            "sampling.t_range must be [lo, hi] with 0 < lo < hi",
        )
        xy_box = tuple(float(v) for v in sampling.get("xy_box", DEFAULT_XY_BOX))
        _require(len(xy_box) == 2 and xy_box[0] < xy_box[1], "sampling.xy_box must be [lo, hi]")

    tol_data = dict(data.get("tolerances", {}))
    if tol_overrides:
        tol_data.update({k: v for k, v in tol_overrides.items() if v is not None})
    tol_kwargs = {}
    for name, attr in (("structure", "structure"), ("class", "cls"), ("curvature", "curvature")):
        if name in tol_data:
            value = tol_data[name]
            _require(
                isinstance(value, (int, float)) and value > 0,
                f"tolerances.{name} must be positive",
            )
            tol_kwargs[attr] = float(value)
    tolerances = Tolerances(**tol_kwargs)

    return ManifoldSpec(
        construction=construction,
        base_kind=kind,
        k_prime=None if k_prime is None else float(k_prime),
        u_expr=u_expr,
        p_kind=p_kind,
        points=points,
        count=count,
        seed=seed,
        t_range=t_range,
        xy_box=xy_box,
        tolerances=tolerances,
        sha256=sha256,
    )


def load_spec(path, tol_overrides: dict | None = None) -> ManifoldSpec:
    try:
        with open(path, "rb") as handle:
            raw = handle.read()
    except OSError as err:
        raise SpecError(f"cannot read spec file: {err}") from err
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as err:
        raise SpecError(f"spec is not valid JSON: {err}") from err
    return parse_spec_dict(data, sha256=hashlib.sha256(raw).hexdigest(), tol_overrides=tol_overrides)


def build_manifold(spec: ManifoldSpec):
    N = cx.make_base(spec.base_kind, k_prime=spec.k_prime, u_expr=spec.u_expr, p_kind=spec.p_kind)
    if spec.construction == "cone":
        return cx.make_cone(N), N
    return cx.make_hyperbolic_extension(N), N


def spec_points(spec: ManifoldSpec, seed: int | None = None) -> np.ndarray:
    """Evaluation points: explicit list, or seeded log-uniform-t sampling."""
    if spec.points is not None:
        return np.asarray(spec.points, dtype=np.float64)
    rng = np.random.default_rng(np.random.PCG64(spec.seed if seed is None else seed))
    lo, hi = spec.t_range
    t = np.exp(rng.uniform(np.log(lo), np.log(hi), size=spec.count))
    xy = rng.uniform(spec.xy_box[0], spec.xy_box[1], size=(spec.count, 2))
    return np.column_stack([t, xy])


# --- per-point records -------------------------------------------------------


def point_record(M, N, index: int, p, tol: Tolerances) -> dict:
    p = np.asarray(p, dtype=np.float64)
    frame = M.frame(p)
    F = fundamental_F(M, p, frame)
    lee = lee_forms(F)
    pack = curvature(M.g, p, phi=M.phi_matrix(p))
    r04 = to_frame(TensorValue(3, ("l",) * 4, pack.r04), frame).components
    rho = to_frame(TensorValue(3, ("l", "l"), pack.ricci), frame).components
    rho_star = to_frame(TensorValue(3, ("l", "l"), pack.rho_star), frame).components
    G = M.g.value(p)
    e = frame.vectors
    report = decompose(F, tol=tol.cls, construction=M.construction)
    structure = validate_structure(M, p, tol=tol.structure)
    tp = cx.theta_prime_on_frame(M, p, frame)
    bracket = (
        cx.extension_r1221_bracket(M, p, frame)
        if M.construction == "hyperbolic_extension"
        else 0.0
    )
    oracle = cx.oracle_expected(M.construction, p[0], N.k_prime(p[1:]), tp, bracket)
    return {
        "index": index,
        "point": p.tolist(),
        "structure_residual": structure.max_residual,
        "F": F.tolist(),
        "lee": {
            "theta": lee.theta.tolist(),
            "theta_star": lee.theta_star.tolist(),
            "omega": lee.omega.tolist(),
        },
        "R": r04.tolist(),
        "rho": rho.tolist(),
        "rho_star": rho_star.tolist(),
        "tau": pack.tau,
        "tau_star": pack.tau_star,
        "k": {
            "k01": sectional(pack.r04, G, e[0], e[1]),
            "k02": sectional(pack.r04, G, e[0], e[2]),
            "k12": sectional(pack.r04, G, e[1], e[2]),
        },
        "class_norms": report.norms,
        "membership": list(report.membership_sorted()),
        "decomposition_residual": report.residual,
        "_oracle": oracle,
        "_theta_prime": tp,
    }


def _max_table_gap(records, getter):
    return max(getter(rec) for rec in records)


def _check(name, max_residual, tolerance, detail=""):
    entry = {
        "name": name,
        "passed": bool(max_residual < tolerance),
        "max_residual": float(max_residual),
        "tolerance": float(tolerance),
    }
    if detail:
        entry["detail"] = detail
    return entry


def _theorem_checks(spec: ManifoldSpec, records, N, base_is_w0: bool) -> list[dict]:
    tol = spec.tolerances
    checks = []
    arr = np.asarray

    checks.append(_check(
        "structure_axioms",
        _max_table_gap(records, lambda r: r["structure_residual"]),
        tol.structure,
    ))
    checks.append(_check(
        "fundamental_table",
        _max_table_gap(records, lambda r: np.abs(arr(r["F"]) - r["_oracle"].F).max()),
        tol.curvature,
    ))
    checks.append(_check(
        "lee_forms",
        _max_table_gap(records, lambda r: max(
            np.abs(arr(r["lee"]["theta"]) - r["_oracle"].theta).max(),
            np.abs(arr(r["lee"]["theta_star"]) - r["_oracle"].theta_star).max(),
            np.abs(arr(r["lee"]["omega"]) - r["_oracle"].omega).max(),
        )),
        tol.curvature,
    ))
    checks.append(_check(
        "curvature_table",
        _max_table_gap(records, lambda r: np.abs(arr(r["R"]) - r["_oracle"].r04).max()),
        tol.curvature,
    ))
    checks.append(_check(
        "xi_sectional",
        _max_table_gap(records, lambda r: max(
            abs(r["k"]["k01"] - r["_oracle"].k01), abs(r["k"]["k02"] - r["_oracle"].k02)
        )),
        tol.curvature,
        detail="0 on the cone, -1 on the hyperbolic extension",
    ))
    checks.append(_check(
        "ricci_table",
        _max_table_gap(records, lambda r: max(
            np.abs(arr(r["rho"]) - r["_oracle"].rho).max(),
            np.abs(arr(r["rho_star"]) - r["_oracle"].rho_star).max(),
        )),
        tol.curvature,
    ))
    checks.append(_check(
        "scalar_curvature",
        _max_table_gap(records, lambda r: abs(r["tau"] - r["_oracle"].tau)),
        tol.curvature,
    ))
    checks.append(_check(
        "star_scalar_flat",
        _max_table_gap(records, lambda r: abs(r["tau_star"])),
        tol.curvature,
    ))

    anchor = "F5" if spec.construction == "cone" else "F4"
    allowed = {"F1", anchor}
    bad = [
        r["index"]
        for r in records
        if not set(r["membership"]) <= allowed or anchor not in r["membership"]
    ]
    f1_points = [r["index"] for r in records if "F1" in r["membership"]]
    if base_is_w0:
        # parallel base: the class-1 part must vanish identically
        passed = not bad and not f1_points
        detail = f"expected [{anchor!r}] at every point (paraholomorphic base)"
    else:
        # the class-1 part lives on the base Lee form and may vanish at
        # isolated points; somewhere it must be present
        passed = not bad and bool(f1_points)
        detail = f"expected membership within ['F1', {anchor!r}] with the class-1 part present somewhere"
    if bad:
        detail += f"; offending point indices {bad[:5]}"
    checks.append({
        "name": "classification_membership",
        "passed": bool(passed),
        "max_residual": float(len(bad)),
        "tolerance": 1.0,
        "detail": detail,
    })
    checks.append(_check(
        "decomposition_residual",
        _max_table_gap(records, lambda r: r["decomposition_residual"]),
        tol.cls,
    ))
    anchor_min = min(r["class_norms"][anchor] for r in records)
    checks.append({
        "name": "no_pure_class1",
        "passed": bool(anchor_min > tol.cls),
        "max_residual": float(anchor_min),
        "tolerance": tol.cls,
        "detail": f"{anchor} norm must stay away from zero; min over points shown",
    })

    if spec.construction == "cone":
        flat = _max_table_gap(records, lambda r: np.abs(arr(r["R"])).max()) < tol.curvature
        k_primes = [N.k_prime(np.asarray(r["point"])[1:]) for r in records]
        unit_base = max(abs(k - 1.0) for k in k_primes) < 1e-12
        checks.append({
            "name": "flatness_iff_unit_base",
            "passed": bool(flat == unit_base),
            "max_residual": 0.0 if flat == unit_base else 1.0,
            "tolerance": 1.0,
            "detail": f"flat={flat}, k'=1 everywhere={unit_base}",
        })
    else:
        if base_is_w0:
            def eta_einstein_gap(r):
                a = N.k_prime(np.asarray(r["point"])[1:]) * np.cosh(2.0 * r["point"][0])
                expected_rho = a * np.eye(3)
                expected_rho[0, 0] = a - (2.0 + a)
                return np.abs(arr(r["rho"]) - expected_rho).max()

            checks.append(_check(
                "para_eta_einstein",
                _max_table_gap(records, eta_einstein_gap),
                tol.curvature,
                detail="rho = k'cosh2t g - (2 + k'cosh2t) eta x eta (paraholomorphic base)",
            ))
        else:
            checks.append({
                "name": "para_eta_einstein",
                "passed": True,
                "max_residual": 0.0,
                "tolerance": tol.curvature,
                "detail": "not applicable: base is not paraholomorphic",
            })
    return checks


def _thread_count() -> int:
    raw = os.environ.get("APAPR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_verification(spec: ManifoldSpec, seed: int | None = None) -> dict:
    """Compute all per-point records and theorem checks; pure given (spec, seed)."""
    M, N = build_manifold(spec)
    pts = spec_points(spec, seed)
    threads = _thread_count()
    work = lambda item: point_record(M, N, item[0], item[1], spec.tolerances)
    items = list(enumerate(pts))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, items))
    else:
        records = [work(item) for item in items]
    records.sort(key=lambda r: r["index"])

    base_pts = [np.asarray(r["point"])[1:] for r in records]
    base_is_w0, w0_report = w0_check(N, base_pts, tol=spec.tolerances.cls)
    checks = _theorem_checks(spec, records, N, base_is_w0)

    for rec in records:
        rec.pop("_oracle")
        rec.pop("_theta_prime")

    metadata = {
        "version": __version__,
        "spec_sha256": spec.sha256,
        "construction": spec.construction,
        "base": spec.base_summary(),
        "seed": spec.seed if seed is None else seed,
        "point_count": len(records),
        "tolerances": spec.tolerances.as_dict(),
        "jet_backend": jet_backend_name(),
        "base_paraholomorphic": bool(base_is_w0),
        "w0_report": w0_report,
    }
    if spec.construction == "hyperbolic_extension":
        # over a paraholomorphic base the extension carries the para-Sasaki-
        # like structure; recorded as a flag only
        metadata["para_sasaki_like"] = bool(base_is_w0)
    return {
        "metadata": metadata,
        "points": records,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def classify_at_point(spec: ManifoldSpec, point) -> dict:
    M, _ = build_manifold(spec)
    p = np.asarray(point, dtype=np.float64)
    F = fundamental_F(M, p)
    report = decompose(F, tol=spec.tolerances.cls, construction=spec.construction)
    return {
        "point": p.tolist(),
        "class_norms": report.norms,
        "membership": list(report.membership_sorted()),
        "decomposition_residual": report.residual,
        "tolerance": report.tolerance,
        "parameters": {
            "theta1": report.params.theta1,
            "theta2": report.params.theta2,
            "theta0": report.params.theta0,
            "theta_star0": report.params.theta_star0,
            "lambda": report.params.lam,
            "mu": report.params.mu,
            "nu": report.params.nu,
            "omega1": report.params.omega1,
            "omega2": report.params.omega2,
        },
    }


def curvature_grid(spec: ManifoldSpec, grid: int, seed: int | None = None) -> list[dict]:
    """Curvature table rows: t geometrically spaced, (x, y) seeded-uniform."""
    if grid < 1:
        raise SpecError("grid must be >= 1")
    M, N = build_manifold(spec)
    rng = np.random.default_rng(np.random.PCG64(spec.seed if seed is None else seed))
    lo, hi = spec.t_range
    ts = np.geomspace(lo, hi, grid)
    rows = []
    for i, t in enumerate(ts):
        x, y = rng.uniform(spec.xy_box[0], spec.xy_box[1], 2)
        p = np.array([t, x, y])
        frame = M.frame(p)
        pack = curvature(M.g, p, phi=M.phi_matrix(p))
        rho = to_frame(TensorValue(3, ("l", "l"), pack.ricci), frame).components
        G = M.g.value(p)
        e = frame.vectors
        rows.append({
            "index": i,
            "point": p.tolist(),
            "tau": pack.tau,
            "tau_star": pack.tau_star,
            "k12": sectional(pack.r04, G, e[1], e[2]),
            "k01": sectional(pack.r04, G, e[0], e[1]),
            "k02": sectional(pack.r04, G, e[0], e[2]),
            "rho": rho.tolist(),
        })
    return rows


# --- serialization -------------------------------------------------------------

_IJ = [(i, j) for i in range(3) for j in range(3)]
_IJK = [(i, j, k) for i in range(3) for j in range(3) for k in range(3)]

CSV_COLUMNS = (
    ["index", "t", "x", "y", "structure_residual"]
    + [f"F_{i}{j}{k}" for (i, j, k) in _IJK]
    + [f"theta_{i}" for i in range(3)]
    + [f"theta_star_{i}" for i in range(3)]
    + [f"omega_{i}" for i in range(3)]
    + ["tau", "tau_star", "k01", "k02", "k12"]
    + [f"rho_{i}{j}" for (i, j) in _IJ]
    + [f"rho_star_{i}{j}" for (i, j) in _IJ]
    + [f"norm_{name}" for name in CLASS_NAMES]
    + ["decomposition_residual", "membership"]
)

CURVATURE_CSV_COLUMNS = (
    ["index", "t", "x", "y", "tau", "tau_star", "k12", "k01", "k02"]
    + [f"rho_{i}{j}" for (i, j) in _IJ]
)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2)


def report_to_csv(report: dict) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for rec in report["points"]:
        F = np.asarray(rec["F"])
        rho = np.asarray(rec["rho"])
        rho_star = np.asarray(rec["rho_star"])
        row = [rec["index"], *rec["point"], rec["structure_residual"]]
        row += [F[i, j, k] for (i, j, k) in _IJK]
        row += rec["lee"]["theta"] + rec["lee"]["theta_star"] + rec["lee"]["omega"]
        row += [rec["tau"], rec["tau_star"], rec["k"]["k01"], rec["k"]["k02"], rec["k"]["k12"]]
        row += [rho[i, j] for (i, j) in _IJ]
        row += [rho_star[i, j] for (i, j) in _IJ]
        row += [rec["class_norms"][name] for name in CLASS_NAMES]
        row += [rec["decomposition_residual"], ";".join(rec["membership"])]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def curvature_rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(CURVATURE_CSV_COLUMNS)]
    for rec in rows:
        rho = np.asarray(rec["rho"])
        row = [rec["index"], *rec["point"], rec["tau"], rec["tau_star"],
               rec["k12"], rec["k01"], rec["k02"]]
        row += [rho[i, j] for (i, j) in _IJ]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"
