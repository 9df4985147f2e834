"""Experiment configuration, built-in test families, and the runner.

A run is fully described by one JSON document (spectrum and matrix
sources, majorant, exponents, sweep range, grids, thresholds).  The
runner resolves the inputs, sweeps the requested bound shape over n for
every (x, q) combination, and assembles a deterministic report: records
sorted by (x, q, n), a summary with the worst ratio and regression
verdicts, and the normalized config echoed back so the exact run can be
reproduced from its own report.

APSUM_THREADS caps the worker pool; results are identical for any count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import QuadratureConfig
from .matrices import (
    MatrixError,
    SummabilityMatrix,
    cesaro_matrix,
    matrix_from_dict,
    load_matrix,
    osc_gm2_matrix,
    riesz_matrix,
)
from .measures import (
    ModulusMajorant,
    SamplePlan,
    WindowGrid,
    fit_class_majorant,
    majorant_from_dict,
    majorant_to_dict,
    resolve_span,
)
from .spectra import (
    QuasiPeriodicFunction,
    Spectrum,
    SpectrumError,
    load_spectrum,
    spectrum_from_dict,
    spectrum_to_dict,
    validate_spectrum,
)
from .strong_means import (
    RatioSeries,
    StrongMeanParams,
    ratio_series,
    strong_mean,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "builtin_spectra",
    "builtin_matrices",
    "run",
    "records_csv",
    "report_to_dict",
    "write_report",
    "max_workers",
]

BUILTIN_SPECTRA = ("smooth", "lacunary", "irrational", "constant")
BUILTIN_MATRICES = ("cesaro", "riesz", "osc-gm2")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")


def builtin_spectra(name: str) -> QuasiPeriodicFunction:
    """Built-in test functions; all pass spectrum validation."""
    if name == "smooth":
        spec = Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0), (10.0, 0.1, 0.0)])
    elif name == "lacunary":
        spec = Spectrum.from_cos_sin(
            1.0, [(2.0**j, 2.0**-j, 0.0) for j in range(11)]
        )
    elif name == "irrational":
        spec = Spectrum.from_cos_sin(
            1.0, [(1.0, 1.0, 0.0), (math.sqrt(2.0) * math.pi, 0.5, 0.0)]
        )
    elif name == "constant":
        spec = Spectrum.from_cos_sin(1.0, [(0.0, 1.0, 0.0)])
    else:
        raise ConfigError("spectrum", f"unknown builtin {name!r}")
    report = validate_spectrum(spec)
    if not report.ok:
        raise SpectrumError(f"builtin {name} failed validation: {report.codes()}")
    return QuasiPeriodicFunction(spec)


def builtin_matrices(name: str, params: dict | None = None) -> SummabilityMatrix:
    params = params or {}
    if name == "cesaro":
        return cesaro_matrix()
    if name == "riesz":
        return riesz_matrix(
            weights=params.get("weights"), exponent=params.get("exponent")
        )
    if name == "osc-gm2":
        return osc_gm2_matrix(c=float(params.get("c", 2.0)))
    raise ConfigError("matrix", f"unknown builtin {name!r}")


def _as_tuple(value, kind=float) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(kind(v) for v in value)
    return (kind(value),)


@dataclass(frozen=True)
class ExperimentConfig:
    spectrum: dict
    theorem: str = "prop4"
    matrix: dict | None = None
    majorant: dict | None = None
    p: float = 2.0
    q: tuple[float, ...] = (1.0,)
    c: float = 2.0
    alpha: float | None = None
    n_range: tuple[int, int] = (1, 64)
    x: tuple[float, ...] = (0.0,)
    x_samples: int = 16
    quadrature: QuadratureConfig = QuadratureConfig()
    grid: WindowGrid = WindowGrid()
    thm5_literal_exponent: bool = False
    max_ratio: float = 50.0
    blowup_head: int = 8
    blowup_factor: float = 2.0
    side_tol: float = 0.05
    output: str | None = None

    @classmethod
    def from_dict(
        cls,
        data: dict,
        base_dir: Path | None = None,
        allow_invalid: bool = False,
    ) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        if "spectrum" not in data:
            raise ConfigError("spectrum", "required")
        theorem = data.get("theorem", "prop4")
        if theorem not in ("prop4", "thm2", "thm5", "thm6"):
            raise ConfigError("theorem", f"unknown theorem {theorem!r}")
        try:
            q = _as_tuple(data.get("q", 1.0))
        except (TypeError, ValueError):
            raise ConfigError("q", "must be a number or list of numbers")
        if any(not v > 0.0 for v in q):
            raise ConfigError("q", "every q must be > 0")
        c = float(data.get("c", 2.0))
        if not c > 1.0:
            raise ConfigError("c", "must be > 1")
        p = float(data.get("p", 2.0))
        if not p > 1.0:
            raise ConfigError("p", "must be > 1 (or inf)")
        n_range = data.get("n_range", [1, 64])
        if (
            not isinstance(n_range, (list, tuple))
            or len(n_range) != 2
            or any(int(v) != v for v in n_range)
        ):
            raise ConfigError("n_range", "must be an integer pair [lo, hi]")
        n_range = (int(n_range[0]), int(n_range[1]))
        if n_range[0] < 0:
            raise ConfigError("n_range", "lo must be >= 0")
        try:
            x = _as_tuple(data.get("x", 0.0))
        except (TypeError, ValueError):
            raise ConfigError("x", "must be a number or list of numbers")
        try:
            quad = QuadratureConfig(**data.get("quadrature", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError("quadrature", str(exc))
        try:
            grid = WindowGrid(**data.get("grid", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid", str(exc))
        cfg = cls(
            spectrum=data["spectrum"],
            theorem=theorem,
            matrix=data.get("matrix"),
            majorant=data.get("majorant"),
            p=p,
            q=q,
            c=c,
            alpha=(None if data.get("alpha") is None else float(data["alpha"])),
            n_range=n_range,
            x=x,
            x_samples=int(data.get("x_samples", 16)),
            quadrature=quad,
            grid=grid,
            thm5_literal_exponent=bool(data.get("thm5_literal_exponent", False)),
            max_ratio=float(data.get("max_ratio", 50.0)),
            blowup_head=int(data.get("blowup_head", 8)),
            blowup_factor=float(data.get("blowup_factor", 2.0)),
            side_tol=float(data.get("side_tol", 0.05)),
            output=data.get("output"),
        )
        cfg.resolve_function(base_dir, allow_invalid)  # cross-field checks
        if cfg.theorem in ("thm2", "thm5", "thm6") and cfg.matrix is None:
            raise ConfigError("matrix", f"required for theorem {cfg.theorem}")
        return cfg

    @classmethod
    def from_file(cls, path, allow_invalid: bool = False) -> "ExperimentConfig":
        path = Path(path)
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("<file>", f"not valid JSON: {exc}")
        return cls.from_dict(data, base_dir=path.parent, allow_invalid=allow_invalid)

    def to_dict(self) -> dict:
        quad = self.quadrature
        grid = self.grid
        return {
            "spectrum": self.spectrum,
            "theorem": self.theorem,
            "matrix": self.matrix,
            "majorant": self.majorant,
            "p": self.p,
            "q": list(self.q),
            "c": self.c,
            "alpha": self.alpha,
            "n_range": list(self.n_range),
            "x": list(self.x),
            "x_samples": self.x_samples,
            "quadrature": {
                "truncation_T": quad.truncation_T,
                "panels_per_oscillation": quad.panels_per_oscillation,
                "rel_tol": quad.rel_tol,
                "abs_tol": quad.abs_tol,
                "gl_nodes": quad.gl_nodes,
            },
            "grid": {
                "u_samples": grid.u_samples,
                "window_length": grid.window_length,
                "panels_per_window": grid.panels_per_window,
                "gl_nodes": grid.gl_nodes,
                "u_span": grid.u_span,
                "refine": grid.refine,
            },
            "thm5_literal_exponent": self.thm5_literal_exponent,
            "max_ratio": self.max_ratio,
            "blowup_head": self.blowup_head,
            "blowup_factor": self.blowup_factor,
            "side_tol": self.side_tol,
            "output": self.output,
        }

    def resolve_function(
        self, base_dir: Path | None = None, allow_invalid: bool = False
    ) -> QuasiPeriodicFunction:
        src = self.spectrum
        if not isinstance(src, dict):
            raise ConfigError("spectrum", "must be an object")
        if "builtin" in src:
            f = builtin_spectra(src["builtin"])
        elif "file" in src:
            path = Path(src["file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            skip = allow_invalid or bool(src.get("allow_invalid"))
            try:
                f = load_spectrum(path, allow_invalid=skip)
            except FileNotFoundError as exc:
                raise ConfigError("spectrum", f"file not found: {exc}")
            except SpectrumError as exc:
                raise ConfigError("spectrum", str(exc))
        else:
            try:
                spec = spectrum_from_dict(src)
            except SpectrumError as exc:
                raise ConfigError("spectrum", str(exc))
            report = validate_spectrum(spec)
            if not report.ok and not allow_invalid:
                raise ConfigError("spectrum", f"invalid inline spectrum: {report.codes()}")
            f = QuasiPeriodicFunction(spec)
        if self.alpha is not None and not math.isclose(
            self.alpha, f.spectrum.alpha, rel_tol=1e-12, abs_tol=0.0
        ):
            raise ConfigError(
                "alpha",
                f"config alpha {self.alpha} does not match spectrum alpha "
                f"{f.spectrum.alpha}",
            )
        return f

    def resolve_matrix(self, base_dir: Path | None = None) -> SummabilityMatrix | None:
        if self.matrix is None:
            return None
        src = self.matrix
        if not isinstance(src, dict):
            raise ConfigError("matrix", "must be an object")
        try:
            if "builtin" in src:
                return builtin_matrices(src["builtin"], src.get("params"))
            if "file" in src:
                path = Path(src["file"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                return load_matrix(path)
            return matrix_from_dict(src)
        except FileNotFoundError as exc:
            raise ConfigError("matrix", f"file not found: {exc}")
        except MatrixError as exc:
            raise ConfigError("matrix", str(exc))

    def resolve_majorant(
        self, f: QuasiPeriodicFunction, x: float
    ) -> ModulusMajorant | None:
        if self.theorem == "thm2":
            return None
        src = self.majorant if self.majorant is not None else {"type": "fit"}
        if not isinstance(src, dict):
            raise ConfigError("majorant", "must be an object")
        if src.get("type") == "fit":
            plan = SamplePlan.default(
                top=float(src.get("top", 2.0 * math.pi)),
                count=int(src.get("count", 20)),
            )
            w, _ = fit_class_majorant(f, x, self.p, plan)
            return w
        try:
            return majorant_from_dict(src)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("majorant", str(exc))


@dataclass(frozen=True)
class ReportRow:
    x: float | None
    q: float
    n: int
    lhs: float
    rhs: float
    ratio: float
    flags: tuple[str, ...]


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    records: tuple[ReportRow, ...]
    summary: dict


def max_workers() -> int:
    raw = os.environ.get("APSUM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _combo_series(
    cfg: ExperimentConfig,
    f: QuasiPeriodicFunction,
    matrix: SummabilityMatrix | None,
    w: ModulusMajorant | None,
    x: float | None,
    q: float,
    n_values,
    x_grid,
) -> RatioSeries:
    params = StrongMeanParams(
        q=q,
        alpha=f.spectrum.alpha,
        c=cfg.c,
        literal_c_exponent=cfg.thm5_literal_exponent,
    )
    return ratio_series(
        f,
        cfg.theorem,
        n_values,
        params,
        matrix=matrix,
        w=w,
        x=x,
        x_grid=x_grid,
        p=cfg.p,
        grid=cfg.grid,
        side_tol=cfg.side_tol,
    )


def run(cfg: ExperimentConfig, base_dir: Path | None = None) -> ExperimentReport:
    """Execute the configured sweep; deterministic for any worker count."""
    f = cfg.resolve_function(base_dir)
    matrix = cfg.resolve_matrix(base_dir)
    lo, hi = cfg.n_range
    n_values = list(range(lo, hi + 1))

    if cfg.theorem == "thm2":
        span = resolve_span(f, cfg.grid)
        x_grid = tuple(np.linspace(0.0, span, max(1, cfg.x_samples), endpoint=False))
        combos = [(None, q) for q in cfg.q]
    else:
        x_grid = None
        combos = [(x, q) for x in cfg.x for q in cfg.q]

    majorants = {
        x: cfg.resolve_majorant(f, x) for x in {x for x, _ in combos if x is not None}
    }

    def compute(combo):
        x, q = combo
        return _combo_series(
            cfg, f, matrix, majorants.get(x), x, q, n_values, x_grid
        )

    workers = max_workers()
    if workers > 1 and len(combos) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            series = list(pool.map(compute, combos))
    else:
        series = [compute(c) for c in combos]

    records: list[ReportRow] = []
    worst = (-math.inf, None)
    regression_ok = True
    side_flags = []
    flag_counts: dict[str, int] = {}
    for (x, q), rs in zip(combos, series):
        for rec in rs.records:
            records.append(ReportRow(x, q, rec.n, rec.lhs, rec.rhs, rec.ratio, rec.flags))
            for fl in rec.flags:
                flag_counts[fl] = flag_counts.get(fl, 0) + 1
            if rec.ratio > worst[0]:
                worst = (rec.ratio, (x, q, rec.n))
        if rs.records:
            ok = (
                rs.max_ratio <= cfg.max_ratio
                and rs.head_tail_bounded(cfg.blowup_head, cfg.blowup_factor)
            )
            regression_ok = regression_ok and ok
        if rs.side_condition_ok is not None:
            side_flags.append(rs.side_condition_ok)

    summary = {
        "theorem": cfg.theorem,
        "records": len(records),
        "max_ratio": worst[0] if records else 0.0,
        "argmax": (
            None
            if worst[1] is None
            else {"x": worst[1][0], "q": worst[1][1], "n": worst[1][2]}
        ),
        "regression_ok": regression_ok,
        "side_condition_ok": (all(side_flags) if side_flags else None),
        "flag_counts": flag_counts,
    }
    return ExperimentReport(config=cfg.to_dict(), records=tuple(records), summary=summary)


def strong_mean_table(cfg: ExperimentConfig, base_dir: Path | None = None) -> str:
    """CSV table of per-n strong means (no bound side): x,q,n,value."""
    f = cfg.resolve_function(base_dir)
    matrix = cfg.resolve_matrix(base_dir)
    if matrix is None:
        raise ConfigError("matrix", "strong-mean table needs a matrix")
    lo, hi = cfg.n_range
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "q", "n", "strong_mean"])
    for x in cfg.x:
        for q in cfg.q:
            params = StrongMeanParams(q=q, alpha=f.spectrum.alpha, c=cfg.c)
            for n in range(lo, hi + 1):
                value = strong_mean(f, x, matrix, n, params)
                writer.writerow([repr(x), repr(q), n, repr(value)])
    return buf.getvalue()


def records_csv(report: ExperimentReport, x: float | None = None, q: float | None = None) -> str:
    """CSV for the (x, q) slice (or everything when unfiltered): columns
    n,lhs,rhs,ratio,flags with deterministic shortest-roundtrip floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "lhs", "rhs", "ratio", "flags"])
    for row in report.records:
        if x is not None and row.x != x:
            continue
        if q is not None and row.q != q:
            continue
        writer.writerow(
            [row.n, repr(row.lhs), repr(row.rhs), repr(row.ratio), ";".join(row.flags)]
        )
    return buf.getvalue()


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "config": report.config,
        "summary": report.summary,
        "records": [
            {
                "x": r.x,
                "q": r.q,
                "n": r.n,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "ratio": r.ratio,
                "flags": list(r.flags),
            }
            for r in report.records
        ],
    }


def _slice_tag(x: float | None, q: float) -> str:
    xs = "all" if x is None else repr(x)
    return f"x{xs}_q{q!r}"


def write_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write report.json plus one records CSV per (x, q) slice."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    jpath = out / "report.json"
    with open(jpath, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(jpath)
    combos = sorted({(r.x, r.q) for r in report.records}, key=lambda t: (repr(t[0]), t[1]))
    for x, q in combos:
        cpath = out / f"records_{_slice_tag(x, q)}.csv"
        with open(cpath, "w") as fh:
            fh.write(records_csv(report, x, q))
        paths.append(cpath)
    return paths
