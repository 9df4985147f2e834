#!/usr/bin/env python3
"""Run the four bound-ratio verifications on built-in test setups.

Writes one report directory per bound shape under --out and prints the
summary verdicts.  A nonzero exit means some bound regression failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from apsum.experiment import ExperimentConfig, run, write_report


def configs(spectrum: str, n_max: int) -> dict[str, dict]:
    base = {
        "spectrum": {"builtin": spectrum},
        "p": 2.0,
        "n_range": [1, n_max],
        "x": [0.0, 0.7],
    }
    return {
        "prop4": {**base, "theorem": "prop4", "q": [0.5, 1.0, 2.0]},
        "thm6": {
            **base,
            "theorem": "thm6",
            "q": [1.0, 2.0],
            "matrix": {"builtin": "cesaro"},
        },
        "thm5": {
            **base,
            "theorem": "thm5",
            "q": [1.0, 2.0],
            "c": 2.0,
            "matrix": {"builtin": "osc-gm2"},
        },
        "thm2": {
            **base,
            "theorem": "thm2",
            "q": [2.0],
            "n_range": [1, min(n_max, 16)],  # omega sweeps are the costly part
            "matrix": {"builtin": "cesaro"},
            "x_samples": 16,
        },
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="report output root")
    parser.add_argument("--spectrum", default="smooth", help="builtin spectrum name")
    parser.add_argument("--n-max", type=int, default=128)
    parser.add_argument(
        "--theorem",
        choices=["prop4", "thm2", "thm5", "thm6"],
        action="append",
        help="restrict to specific bound shapes (repeatable)",
    )
    args = parser.parse_args(argv)

    wanted = args.theorem or ["prop4", "thm6", "thm5", "thm2"]
    all_ok = True
    for name, data in configs(args.spectrum, args.n_max).items():
        if name not in wanted:
            continue
        report = run(ExperimentConfig.from_dict(data))
        out_dir = Path(args.out) / f"{args.spectrum}_{name}"
        write_report(report, out_dir)
        ok = report.summary["regression_ok"]
        all_ok = all_ok and ok
        print(
            f"{name:6s} max_ratio={report.summary['max_ratio']:.4f} "
            f"regression_ok={ok} -> {out_dir}"
        )
    return 0 if all_ok else 3


if __name__ == "__main__":
    sys.exit(main())
