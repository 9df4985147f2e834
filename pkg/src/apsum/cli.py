"""Command-line entry points.

Exit codes: 0 success, 2 validation failure (bad config, bad input file),
3 tolerance or bound-regression failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import (
    ConfigError,
    ExperimentConfig,
    records_csv,
    report_to_dict,
    run,
    strong_mean_table,
    write_report,
)
from .kernels import QuadratureToleranceError
from .matrices import MatrixError, class_membership, load_matrix
from .spectra import SpectrumError, validate_spectrum

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TOLERANCE = 3

VALIDATION_ERRORS = (ConfigError, SpectrumError, MatrixError, FileNotFoundError)


def _load_config(path: str) -> tuple[ExperimentConfig, Path]:
    cfg = ExperimentConfig.from_file(path)
    return cfg, Path(path).parent


def cmd_validate(args) -> int:
    try:
        cfg = ExperimentConfig.from_file(args.config, allow_invalid=args.allow_invalid)
        base = Path(args.config).parent
        f = cfg.resolve_function(base, allow_invalid=args.allow_invalid)
        cfg.resolve_matrix(base)
    except VALIDATION_ERRORS as exc:
        field = getattr(exc, "field", None)
        print(json.dumps({"ok": False, "field": field, "error": str(exc)}))
        return EXIT_VALIDATION
    issues = [
        {"code": i.code, "index": i.index, "detail": i.detail}
        for i in validate_spectrum(f).issues
    ]
    print(json.dumps({"ok": True, "theorem": cfg.theorem, "spectrum_issues": issues}))
    return EXIT_OK


def cmd_classes(args) -> int:
    try:
        matrix = load_matrix(args.matrix_file)
        lo, hi = args.n_range
        names = [args.cls] if args.cls else ["ms", "rbvs", "gm", "gm2"]
        out = {}
        for name in names:
            rep = class_membership(
                matrix, name, args.threshold, range(lo, hi + 1), c=args.c
            )
            out[name] = {
                "member": rep.member,
                "sup_constant": rep.sup_constant,
                "threshold": rep.threshold,
                "side_condition_ok": rep.side_condition_ok,
                **({"c": rep.c} if rep.c is not None else {}),
            }
    except VALIDATION_ERRORS as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_VALIDATION
    print(json.dumps({"matrix": matrix.describe(), "classes": out}, sort_keys=True))
    return EXIT_OK


def cmd_strong_mean(args) -> int:
    try:
        cfg, base = _load_config(args.config)
        table = strong_mean_table(cfg, base)
    except VALIDATION_ERRORS as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except QuadratureToleranceError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_TOLERANCE
    if args.out:
        Path(args.out).write_text(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cfg, base = _load_config(args.config)
        if args.theorem:
            data = dict(cfg.to_dict())
            data["theorem"] = args.theorem
            cfg = ExperimentConfig.from_dict(data, base)
        report = run(cfg, base)
    except VALIDATION_ERRORS as exc:
        field = getattr(exc, "field", None)
        print(json.dumps({"ok": False, "field": field, "error": str(exc)}))
        return EXIT_VALIDATION
    except QuadratureToleranceError as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_TOLERANCE
    print(json.dumps(report.summary, sort_keys=True))
    if not report.summary["regression_ok"]:
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        cfg, base = _load_config(args.config)
        report = run(cfg, base)
    except VALIDATION_ERRORS as exc:
        field = getattr(exc, "field", None)
        print(json.dumps({"ok": False, "field": field, "error": str(exc)}))
        return EXIT_VALIDATION
    except QuadratureToleranceError as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_TOLERANCE
    out = args.out or cfg.output
    if out is None:
        print(json.dumps(report_to_dict(report), sort_keys=True))
    else:
        paths = write_report(report, out)
        print(json.dumps({"written": [str(p) for p in paths]}, sort_keys=True))
    if not report.summary["regression_ok"]:
        return EXIT_TOLERANCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apsum",
        description="Strong summation experiments for quasi-periodic signals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a config and its inputs")
    p.add_argument("config")
    p.add_argument(
        "--allow-invalid",
        action="store_true",
        help="report spectrum violations instead of rejecting them",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classes", help="sequence-class constants of a matrix file")
    p.add_argument("matrix_file")
    p.add_argument("--class", dest="cls", choices=["ms", "rbvs", "gm", "gm2"])
    p.add_argument("--c", type=float, default=2.0)
    p.add_argument("--threshold", type=float, default=8.0)
    p.add_argument("--n-range", nargs=2, type=int, default=[0, 64], metavar=("LO", "HI"))
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("strong-mean", help="per-n strong mean table")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_strong_mean)

    p = sub.add_parser("verify", help="run the bound-ratio regression")
    p.add_argument("config")
    p.add_argument("--theorem", choices=["prop4", "thm2", "thm5", "thm6"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="run and write the full report")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
