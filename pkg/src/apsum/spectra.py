"""Quasi-periodic test functions with separated frequency spectra.

A test function is a finite real trigonometric sum

    f(x) = a_0 + sum_nu (c_nu cos(l_nu x) + s_nu sin(l_nu x)),

stored as strictly increasing nonnegative frequencies ``l_nu`` with one
complex amplitude per frequency.  The stored amplitude is the one-sided
coefficient ``A_nu = (c_nu - i s_nu) / 2`` of the two-sided exponential
form, so a single entry stands for the conjugate pair at ``+-l_nu`` and
real evaluation is exact.  Consecutive frequencies must be separated by
at least the declared gap ``alpha``.

Evaluation, symmetric second differences, and finite-span mean Fourier
coefficients are all pure functions of immutable inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SpectrumError",
    "SpectrumEntry",
    "Spectrum",
    "QuasiPeriodicFunction",
    "ValidationIssue",
    "ValidationReport",
    "validate_spectrum",
    "fourier_coefficient",
    "spectrum_from_dict",
    "spectrum_to_dict",
    "load_spectrum",
    "save_spectrum",
]

# Relative slack for frequency comparisons against band edges and cutoffs.
FREQ_RTOL = 1e-12


class SpectrumError(ValueError):
    """Raised when a spectrum violates its structural constraints."""


@dataclass(frozen=True)
class SpectrumEntry:
    """One nonnegative frequency with its one-sided complex amplitude."""

    freq: float
    amp: complex

    @property
    def cos_coef(self) -> float:
        if self.freq == 0.0:
            return self.amp.real
        return 2.0 * self.amp.real

    @property
    def sin_coef(self) -> float:
        if self.freq == 0.0:
            return 0.0
        return -2.0 * self.amp.imag

    @property
    def pair_weight(self) -> float:
        """Total two-sided amplitude mass carried by this entry."""
        if self.freq == 0.0:
            return abs(self.amp)
        return 2.0 * abs(self.amp)


@dataclass(frozen=True)
class Spectrum:
    """Finite frequency content of one test function plus its gap ``alpha``."""

    alpha: float
    entries: tuple[SpectrumEntry, ...]

    @classmethod
    def from_cos_sin(
        cls, alpha: float, terms: Iterable[tuple[float, float, float]]
    ) -> "Spectrum":
        """Build from ``(frequency, cos coefficient, sin coefficient)`` triples."""
        entries = []
        for freq, c, s in terms:
            freq = float(freq)
            if freq == 0.0:
                if s != 0.0:
                    raise SpectrumError("sine coefficient at frequency 0 must be 0")
                amp = complex(c, 0.0)
            else:
                amp = complex(0.5 * c, -0.5 * s)
            entries.append(SpectrumEntry(freq, amp))
        entries.sort(key=lambda e: e.freq)
        return cls(float(alpha), tuple(entries))

    def frequencies(self) -> np.ndarray:
        return np.array([e.freq for e in self.entries], dtype=float)

    def max_frequency(self) -> float:
        return self.entries[-1].freq if self.entries else 0.0

    def min_positive_frequency(self) -> float:
        for e in self.entries:
            if e.freq > 0.0:
                return e.freq
        return 0.0

    def amplitude_mass(self) -> float:
        """Sum of pair weights; a pointwise bound on |f|."""
        return sum(e.pair_weight for e in self.entries)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    index: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> tuple[str, ...]:
        return tuple(i.code for i in self.issues)


@dataclass(frozen=True)
class QuasiPeriodicFunction:
    """Exactly evaluable real function defined by a finite spectrum."""

    spectrum: Spectrum
    real_valued: bool = True

    def __call__(self, x):
        """Evaluate f at scalar or array ``x``; exact finite sum."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for e in self.spectrum.entries:
            if e.freq == 0.0:
                out += e.cos_coef
            else:
                out += e.cos_coef * np.cos(e.freq * x) + e.sin_coef * np.sin(e.freq * x)
        return float(out) if out.ndim == 0 else out

    def term_values(self, x: float) -> np.ndarray:
        """Per-entry additive contribution to f(x), in spectrum order."""
        vals = np.empty(len(self.spectrum.entries))
        for i, e in enumerate(self.spectrum.entries):
            if e.freq == 0.0:
                vals[i] = e.cos_coef
            else:
                vals[i] = e.cos_coef * math.cos(e.freq * x) + e.sin_coef * math.sin(
                    e.freq * x
                )
        return vals

    def second_difference(self, x: float, t):
        """f(x+t) + f(x-t) - 2 f(x), evaluated term by term.

        Uses cos(l t) - 1 = -2 sin^2(l t / 2) per term, which keeps the
        quadratic small-t behaviour free of cancellation.
        """
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for g, e in zip(self.term_values(x), self.spectrum.entries):
            if e.freq == 0.0:
                continue
            s = np.sin(0.5 * e.freq * t)
            out += -4.0 * g * (s * s)
        return float(out) if out.ndim == 0 else out

    def symmetric_translate(self, x: float, t):
        """f(x+t) + f(x-t) as sum_nu 2 g_nu(x) cos(l_nu t)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for g, e in zip(self.term_values(x), self.spectrum.entries):
            if e.freq == 0.0:
                out += 2.0 * g
            else:
                out += 2.0 * g * np.cos(e.freq * t)
        return float(out) if out.ndim == 0 else out

    def shift(self, a: float) -> "QuasiPeriodicFunction":
        """The translate x -> f(x + a); amplitudes rotate, moduli unchanged."""
        entries = []
        for e in self.spectrum.entries:
            if e.freq == 0.0:
                entries.append(e)
            else:
                entries.append(SpectrumEntry(e.freq, e.amp * np.exp(1j * e.freq * a)))
        return QuasiPeriodicFunction(
            Spectrum(self.spectrum.alpha, tuple(entries)), self.real_valued
        )

    def translate_difference(self, a: float) -> "QuasiPeriodicFunction":
        """The difference x -> f(x + a) - f(x); the constant term drops."""
        entries = []
        for e in self.spectrum.entries:
            if e.freq == 0.0:
                continue
            entries.append(
                SpectrumEntry(e.freq, e.amp * (np.exp(1j * e.freq * a) - 1.0))
            )
        return QuasiPeriodicFunction(
            Spectrum(self.spectrum.alpha, tuple(entries)), self.real_valued
        )

    def scaled(self, s: float) -> "QuasiPeriodicFunction":
        entries = tuple(
            SpectrumEntry(e.freq, e.amp * s) for e in self.spectrum.entries
        )
        return QuasiPeriodicFunction(
            Spectrum(self.spectrum.alpha, entries), self.real_valued
        )

    def sup_bound(self) -> float:
        return self.spectrum.amplitude_mass()


def validate_spectrum(obj) -> ValidationReport:
    """Report ordering, gap, and amplitude violations; never raises."""
    spec = obj.spectrum if isinstance(obj, QuasiPeriodicFunction) else obj
    issues: list[ValidationIssue] = []
    if not math.isfinite(spec.alpha) or spec.alpha <= 0.0:
        issues.append(ValidationIssue("alpha", -1, f"gap alpha={spec.alpha!r} must be positive"))
    prev = None
    for i, e in enumerate(spec.entries):
        if not math.isfinite(e.freq) or e.freq < 0.0:
            issues.append(ValidationIssue("frequency", i, f"frequency {e.freq!r} invalid"))
            continue
        if e.freq == 0.0:
            if i != 0:
                issues.append(
                    ValidationIssue("ordering", i, "zero frequency allowed only first")
                )
            if abs(e.amp.imag) > 0.0:
                issues.append(
                    ValidationIssue("dc-amplitude", i, "constant term must be real")
                )
        else:
            if e.pair_weight == 0.0:
                issues.append(
                    ValidationIssue("zero-amplitude", i, f"entry at {e.freq} has zero amplitude")
                )
        if prev is not None:
            if e.freq <= prev:
                issues.append(
                    ValidationIssue("ordering", i, f"{e.freq} not above predecessor {prev}")
                )
            elif e.freq - prev < spec.alpha * (1.0 - FREQ_RTOL):
                issues.append(
                    ValidationIssue(
                        "gap", i, f"gap {e.freq - prev:.6g} below alpha={spec.alpha:.6g}"
                    )
                )
        prev = e.freq
    return ValidationReport(tuple(issues))


def fourier_coefficient(
    f: QuasiPeriodicFunction,
    freq: float,
    span: float,
    panels_per_unit: int | None = None,
    gl_nodes: int = 8,
) -> complex:
    """Finite-span mean coefficient (1/L) int_0^L f(t) exp(-i freq t) dt.

    Converges to the amplitude at ``freq`` with O(1/L) error for separated
    spectra.  Composite Gauss-Legendre panels sized to the fastest
    oscillation present.
    """
    if not (math.isfinite(freq) and math.isfinite(span)) or span <= 0.0:
        raise ValueError(f"freq={freq!r}, span={span!r} must be finite with span > 0")
    top = max(abs(freq), f.spectrum.max_frequency(), 1e-9)
    width = min(math.pi / top, 1.0)
    if panels_per_unit is not None:
        width = min(width, 1.0 / panels_per_unit)
    n_panels = max(1, int(math.ceil(span / width)))
    h = span / n_panels
    xi, wt = np.polynomial.legendre.leggauss(gl_nodes)
    centers = (np.arange(n_panels) + 0.5) * h
    t = (centers[:, None] + 0.5 * h * xi[None, :]).ravel()
    w = np.tile(0.5 * h * wt, n_panels)
    vals = f(t) * np.exp(-1j * freq * t)
    return complex(np.dot(w, vals) / span)


def spectrum_from_dict(data: dict) -> Spectrum:
    try:
        alpha = float(data["alpha"])
        terms = [
            (float(e["lambda"]), float(e.get("cos", 0.0)), float(e.get("sin", 0.0)))
            for e in data["entries"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpectrumError(f"malformed spectrum data: {exc}") from exc
    return Spectrum.from_cos_sin(alpha, terms)


def spectrum_to_dict(spec: Spectrum) -> dict:
    return {
        "alpha": spec.alpha,
        "entries": [
            {"lambda": e.freq, "cos": e.cos_coef, "sin": e.sin_coef}
            for e in spec.entries
        ],
    }


def load_spectrum(path, allow_invalid: bool = False) -> QuasiPeriodicFunction:
    """Load a spectrum file, rejecting structural violations by default."""
    with open(path) as fh:
        data = json.load(fh)
    spec = spectrum_from_dict(data)
    report = validate_spectrum(spec)
    if not report.ok and not allow_invalid:
        lines = "; ".join(f"{i.code}[{i.index}]: {i.detail}" for i in report.issues)
        raise SpectrumError(f"invalid spectrum in {path}: {lines}")
    return QuasiPeriodicFunction(spec)


def save_spectrum(spec: Spectrum, path) -> None:
    with open(path, "w") as fh:
        json.dump(spectrum_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
