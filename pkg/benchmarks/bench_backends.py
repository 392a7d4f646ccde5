#!/usr/bin/env python3
"""Benchmark the compiled jet kernel against the pure-Python fallback.

Times single-field jet evaluation on representative metric-component
expressions, then an end-to-end curvature computation (the hot path of
every verification run), for each available backend.

Usage:
    python benchmarks/bench_backends.py [--repeats 2000] [--curvature-points 50]
"""

import argparse
import time

import numpy as np

from apaprgeo import constructions as cx
from apaprgeo.exprcore import (
    available_backends,
    eval_jet2,
    parse_scalar_expr,
    set_jet_backend,
)
from apaprgeo.riemann import curvature

FIELDS = {
    "cone g_xx (round base)": (
        "(t^2)*exp(2*(-ln(1 + 1.0*(x^2 + y^2))))",
        ("t", "x", "y"),
    ),
    "extension g_xy (swap)": ("sinh(2*t)*exp(2*(x))", ("t", "x", "y")),
    "polynomial": ("x^3 - 2*x^2*y + y^2 + t", ("t", "x", "y")),
}


def bench_field(text, coords, repeats, rng):
    f = parse_scalar_expr(text, coords)
    pts = np.column_stack([
        rng.uniform(0.5, 2.0, repeats),
        rng.uniform(-0.8, 0.8, repeats),
        rng.uniform(-0.8, 0.8, repeats),
    ])
    start = time.perf_counter()
    for p in pts:
        eval_jet2(f, p)
    return (time.perf_counter() - start) / repeats


def bench_curvature(points, rng):
    M = cx.make_hyperbolic_extension(cx.make_base("conformal", u_expr="x", p_kind="swap"))
    pts = np.column_stack([
        rng.uniform(0.4, 1.8, points),
        rng.uniform(-0.8, 0.8, points),
        rng.uniform(-0.8, 0.8, points),
    ])
    start = time.perf_counter()
    for p in pts:
        curvature(M.g, p, phi=M.phi_matrix(p))
    return (time.perf_counter() - start) / points


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000, help="jet evaluations per field")
    parser.add_argument("--curvature-points", type=int, default=50)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    results = {}
    for backend in backends:
        set_jet_backend(backend)
        rng = np.random.default_rng(0)
        rows = {}
        for label, (text, coords) in FIELDS.items():
            rows[label] = bench_field(text, coords, args.repeats, rng)
        rows["curvature (end-to-end)"] = bench_curvature(args.curvature_points, rng)
        results[backend] = rows

    labels = list(next(iter(results.values())))
    width = max(len(s) for s in labels)
    header = f"{'case':<{width}}" + "".join(f"  {b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for label in labels:
        line = f"{label:<{width}}"
        for backend in backends:
            line += f"  {results[backend][label] * 1e6:>10.1f}us"
        if len(backends) == 2:
            slow, fast = results["python"][label], results["cython"][label]
            line += f"  {slow / fast:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
