"""Command-line front end: verify / classify / curvature.

Exit codes: 0 success (all checks pass), 1 verification failure,
2 specification or usage error.  Set APAPR_THREADS to parallelize
point evaluation; reports are byte-identical either way.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .apapr import ChartDomainError
from .exprcore import EvalDomainError
from .verification import (
    SpecError,
    classify_at_point,
    curvature_grid,
    curvature_rows_to_csv,
    load_spec,
    report_to_csv,
    report_to_json,
    run_verification,
)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--spec", required=True, help="path to the JSON manifold spec")
    parser.add_argument("--tol-structure", type=float, default=None, help="override structure tolerance")
    parser.add_argument("--tol-class", type=float, default=None, help="override classification tolerance")
    parser.add_argument("--tol-curvature", type=float, default=None, help="override curvature tolerance")
    parser.add_argument("--seed", type=int, default=None, help="override the sampling seed")
    parser.add_argument("--out", default=None, help="write the report to this path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="report format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apaprgeo",
        description="Verify structure and curvature of the cone / hyperbolic-extension constructions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run all theorem checks over sampled points")
    _add_common(verify)

    classify = sub.add_parser("classify", help="basic-class membership at one point")
    _add_common(classify)
    classify.add_argument("--point", required=True, help="chart point as 't,x,y'")

    curv = sub.add_parser("curvature", help="curvature table over a t-grid")
    _add_common(curv)
    curv.add_argument("--grid", type=int, default=10, help="number of t-grid rows (>= 1)")
    curv.set_defaults(format="csv")
    return parser


def _tol_overrides(args) -> dict:
    return {
        "structure": args.tol_structure,
        "class": args.tol_class,
        "curvature": args.tol_curvature,
    }


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    spec = load_spec(args.spec, _tol_overrides(args))
    report = run_verification(spec, seed=args.seed)
    text = report_to_json(report) + "\n" if args.format == "json" else report_to_csv(report)
    _emit(text, args.out)
    if not report["passed"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_classify(args) -> int:
    spec = load_spec(args.spec, _tol_overrides(args))
    try:
        point = tuple(float(v) for v in args.point.split(","))
    except ValueError as err:
        raise SpecError(f"--point must be 't,x,y': {err}") from err
    if len(point) != 3:
        raise SpecError("--point must have exactly three components")
    result = classify_at_point(spec, point)
    _emit(json.dumps(result, indent=2) + "\n", args.out)
    return 0


def cmd_curvature(args) -> int:
    spec = load_spec(args.spec, _tol_overrides(args))
    rows = curvature_grid(spec, args.grid, seed=args.seed)
    if args.format == "csv":
        text = curvature_rows_to_csv(rows)
    else:
        text = json.dumps(rows, indent=2) + "\n"
    _emit(text, args.out)
    return 0


_COMMANDS = {"verify": cmd_verify, "classify": cmd_classify, "curvature": cmd_curvature}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SpecError as err:
        print(f"spec error: {err}", file=sys.stderr)
        return 2
    except (ChartDomainError, EvalDomainError) as err:
        print(f"evaluation error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
