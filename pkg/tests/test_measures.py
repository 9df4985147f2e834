import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apsum.measures import (
    PowerModulus,
    SamplePlan,
    TableModulus,
    T_LATTICE,
    WindowGrid,
    best_approx_tail,
    check_eq7,
    fit_class_majorant,
    fit_majorant,
    majorant_from_dict,
    majorant_to_dict,
    modulus_omega,
    omega_class_check,
    phi_average,
    pointwise_modulus,
    resolve_span,
    shifted_difference_mean,
    stepanov_norm,
)
from apsum.spectra import Spectrum, QuasiPeriodicFunction

COS = QuasiPeriodicFunction(Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0)]))
CONST = QuasiPeriodicFunction(Spectrum.from_cos_sin(1.0, [(0.0, 1.0, 0.0)]))
SMOOTH = QuasiPeriodicFunction(
    Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0), (10.0, 0.1, 0.0)])
)


def random_function(seed, max_terms=4):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_terms + 1))
    alpha = float(rng.uniform(0.4, 1.2))
    lams = np.cumsum(rng.uniform(alpha, 2.0 * alpha, n)) + alpha
    terms = [
        (float(l), float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))) for l in lams
    ]
    return QuasiPeriodicFunction(Spectrum.from_cos_sin(alpha, terms))


class TestMajorants:
    def test_power_family(self):
        w = PowerModulus(2.0, 0.5)
        assert w(0.0) == 0.0
        assert w(4.0) == pytest.approx(4.0)

    def test_power_cap(self):
        w = PowerModulus(1.0, 1.0, cap=2.0)
        assert w(1.5) == 1.5
        assert w(3.0) == 2.0

    def test_power_validation(self):
        with pytest.raises(ValueError):
            PowerModulus(1.0, 1.5)
        with pytest.raises(ValueError):
            PowerModulus(-1.0, 1.0)

    def test_table_eval_and_extension(self):
        w = TableModulus(((0.0, 0.0), (1.0, 1.0), (2.0, 1.5)))
        assert w(0.5) == pytest.approx(0.5)
        assert w(5.0) == pytest.approx(1.5)

    def test_table_subadditivity_rejected(self):
        # convex growth violates w(d1+d2) <= w(d1)+w(d2)
        with pytest.raises(ValueError):
            TableModulus(((0.0, 0.0), (1.0, 0.1), (2.0, 1.0)))

    def test_table_must_start_at_origin(self):
        with pytest.raises(ValueError):
            TableModulus(((0.5, 0.1), (1.0, 0.2)))

    def test_scaling(self):
        w = PowerModulus(1.0, 1.0).scaled(3.0)
        assert w(2.0) == pytest.approx(6.0)

    def test_dict_round_trip(self):
        for w in (PowerModulus(1.5, 0.5, cap=3.0), TableModulus(((0.0, 0.0), (1.0, 2.0)))):
            again = majorant_from_dict(majorant_to_dict(w))
            assert type(again) is type(w)
            for d in (0.0, 0.7, 2.5):
                assert again(d) == pytest.approx(w(d))


class TestStepanovNorm:
    def test_constant(self):
        for p in (1.5, 2.0, 4.0, math.inf):
            assert stepanov_norm(CONST, p) == pytest.approx(1.0, abs=1e-9)

    def test_cos_sup(self):
        assert stepanov_norm(COS, math.inf) == pytest.approx(1.0, abs=1e-9)

    def test_cos_quadratic_mean(self):
        # every pi-window of cos^2 integrates to pi/2 exactly
        assert stepanov_norm(COS, 2.0) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-3)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            stepanov_norm(COS, 1.0)

    def test_monotone_in_p(self):
        for seed in (3, 14, 15):
            f = random_function(seed)
            ps = (1.5, 2.0, 4.0, math.inf)
            norms = [stepanov_norm(f, p) for p in ps]
            for a, b in zip(norms, norms[1:]):
                assert a <= b + 1e-9

    def test_translation_invariance(self):
        rng = np.random.default_rng(5)
        f = random_function(9)
        base = stepanov_norm(f, 2.0)
        for shift in rng.uniform(-3.0, 3.0, 4):
            assert stepanov_norm(f.shift(float(shift)), 2.0) == pytest.approx(
                base, abs=1e-3
            )


class TestModulusOmega:
    def test_zero_delta(self):
        assert modulus_omega(SMOOTH, 0.0, 2.0) == 0.0

    @pytest.mark.parametrize("delta", [0.1, 1.0, 3.0])
    def test_cos_sup_closed_form(self, delta):
        got = modulus_omega(COS, delta, math.inf)
        assert got == pytest.approx(2.0 * math.sin(delta / 2.0), abs=1e-3)

    def test_monotone_on_lattice(self):
        f = random_function(21)
        deltas = [i * T_LATTICE for i in (1, 2, 4, 7, 12, 20)]
        vals = [modulus_omega(f, d, 2.0) for d in deltas]
        for a, b in zip(vals, vals[1:]):
            assert a <= b + 1e-12


class TestPointwiseModulus:
    def test_constant_zero(self):
        assert pointwise_modulus(CONST, 0.3, 1.0, 2.0) == 0.0

    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_cos_closed_form(self, delta):
        got = pointwise_modulus(COS, 0.0, delta, 1.0)
        assert got == pytest.approx(2.0 - 2.0 * math.sin(delta) / delta, abs=1e-6)

    def test_vanishes_as_delta_shrinks(self):
        vals = [pointwise_modulus(SMOOTH, 0.7, d, 2.0) for d in (1e-2, 1e-4, 1e-6)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-10

    def test_sup_variant(self):
        got = pointwise_modulus(COS, 0.0, math.pi, math.inf)
        assert got == pytest.approx(4.0, abs=1e-8)


class TestPhiAverage:
    def test_constant_zero(self):
        assert phi_average(CONST, 1.0, 0.5, 2.0) == 0.0

    def test_cos_closed_form(self):
        delta, nu = 0.8, 1.3
        got = phi_average(COS, 0.0, delta, nu)
        want = (2.0 / delta) * (math.sin(nu + delta) - math.sin(nu)) - 2.0
        assert got == pytest.approx(want, abs=1e-9)

    def test_small_delta_limit(self):
        nu = 0.9
        got = phi_average(SMOOTH, 0.4, 1e-7, nu)
        assert got == pytest.approx(SMOOTH.second_difference(0.4, nu), abs=1e-6)


class TestBestApproxTail:
    def test_beyond_spectrum_zero(self):
        assert best_approx_tail(SMOOTH, 10.0) == 0.0
        assert best_approx_tail(SMOOTH, 12.0) == 0.0

    def test_partial_tail(self):
        assert best_approx_tail(SMOOTH, 5.0) == pytest.approx(0.1)

    def test_full_tail(self):
        assert best_approx_tail(SMOOTH, 0.5) == pytest.approx(1.1)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), s1=st.floats(0, 20), s2=st.floats(0, 20))
    def test_nonincreasing_in_cutoff(self, seed, s1, s2):
        f = random_function(seed)
        lo, hi = min(s1, s2), max(s1, s2)
        assert best_approx_tail(f, hi) <= best_approx_tail(f, lo) + 1e-15


class TestOmegaClass:
    def test_constant_function_zero_constants(self):
        rep = omega_class_check(CONST, 0.0, PowerModulus(1.0), 2.0)
        assert rep.c1 == 0.0 and rep.c2 == 0.0
        assert rep.member

    def test_cos_with_capped_linear(self):
        w = PowerModulus(1.0, 1.0, cap=2.0)
        rep = omega_class_check(COS, 0.0, w, 2.0)
        assert math.isfinite(rep.c1) and math.isfinite(rep.c2)
        assert rep.c1 > 0.0 and rep.c2 > 0.0

    def test_zero_majorant_fails(self):
        rep = omega_class_check(COS, 0.0, PowerModulus(0.0), 2.0)
        assert rep.constant == math.inf
        assert not rep.member


class TestEq7:
    def test_constant_always_true(self):
        w = PowerModulus(0.0)
        assert check_eq7(CONST, 0.3, w, 1.0, 2.0)

    def test_cos_rescaled_grid(self):
        w, rep = fit_class_majorant(COS, 0.0, 2.0)
        assert rep.constant <= 1.0
        pts = [2.0 * math.pi * i / 20 for i in range(1, 21)]
        assert all(check_eq7(COS, 0.0, w, d1, d2) for d1 in pts for d2 in pts)

    def test_symmetric_samples(self):
        w, _ = fit_class_majorant(COS, 0.0, 2.0)
        for d in (0.3, 1.0, 2.0, 3.1):
            assert check_eq7(COS, 0.0, w, d, d)


class TestShiftedDifferenceMean:
    def test_constant_zero(self):
        assert shifted_difference_mean(CONST, 0.0, 1.0, 0.5, 2.0) == 0.0

    def test_sup_over_x_bounded_by_translate_modulus(self):
        # the shifted second difference splits into two translate
        # differences at shift gamma, so its windowed mean stays within a
        # fixed multiple of the translate modulus at gamma
        p = 2.0
        grid = WindowGrid()
        span = resolve_span(SMOOTH, grid)
        xs = np.linspace(0.0, span, 48, endpoint=False)
        for gamma in (0.25, 0.5, 1.0):
            om = modulus_omega(SMOOTH, gamma, p, grid)
            for delta in (0.3, 0.7, 1.5):
                top = max(
                    shifted_difference_mean(SMOOTH, float(x), delta, s * gamma, p)
                    for x in xs
                    for s in (1.0, -1.0)
                )
                assert top <= 4.0 * om


class TestFitMajorant:
    def test_envelope_dominates_samples(self):
        deltas = [2.0 * math.pi * i / 40 for i in range(1, 41)]
        w = fit_majorant(SMOOTH, 0.7, 2.0, deltas)
        for d in deltas:
            assert w(d) >= pointwise_modulus(SMOOTH, 0.7, d, 2.0) - 1e-12

    def test_constant_function_fits_zero(self):
        w = fit_majorant(CONST, 0.0, 2.0)
        assert w(1.0) == 0.0

    def test_subadditive_on_pairs(self):
        w = fit_majorant(SMOOTH, 0.0, 2.0)
        ds = [d for d, _ in w.knots]
        for a in ds:
            for b in ds:
                assert w(a + b) <= w(a) + w(b) + 1e-12
