import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apsum.kernels import (
    QuadratureConfig,
    QuadratureToleranceError,
    gap_free,
    kernel_mass,
    partial_sum_direct,
    partial_sum_kernel,
    partial_sum_kernel_sweep,
    psi,
    psi_k,
    tail_bound,
)
from apsum.spectra import Spectrum, QuasiPeriodicFunction

COS = QuasiPeriodicFunction(Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0)]))
SMOOTH = QuasiPeriodicFunction(
    Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0), (10.0, 0.1, 0.0)])
)
CONST = QuasiPeriodicFunction(Spectrum.from_cos_sin(1.0, [(0.0, 1.0, 0.0)]))
# sqrt(2)*pi ~ 4.44 sits inside the open band (4.0, 4.5) at k = 8
IRRATIONAL = QuasiPeriodicFunction(
    Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0), (math.sqrt(2) * math.pi, 0.5, 0.0)])
)


class TestPsi:
    def test_zero_limit(self):
        assert psi(1.0, 3.0, 0.0) == pytest.approx(2.0 / math.pi, abs=1e-15)

    def test_second_sine_zero(self):
        # (eta+lam)t/2 = pi at t = pi/2
        assert psi(1.0, 3.0, math.pi / 2) == pytest.approx(0.0, abs=1e-15)

    def test_closed_form_value(self):
        # independent evaluation of the defining formula
        lam, eta, t = 1.0, 3.0, 1.0
        expected = (
            2.0
            * math.sin(0.5 * (eta - lam) * t)
            * math.sin(0.5 * (eta + lam) * t)
            / (math.pi * (eta - lam) * t * t)
        )
        assert psi(lam, eta, t) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(math.sin(1) * math.sin(2) / math.pi, rel=1e-15)

    def test_rejects_bad_band(self):
        with pytest.raises(ValueError):
            psi(3.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            psi(0.0, 1.0, 0.5)

    @settings(max_examples=100, deadline=None)
    @given(
        lam=st.floats(0.05, 20.0),
        width=st.floats(0.05, 10.0),
        t=st.floats(-30.0, 30.0),
    )
    def test_even_in_t(self, lam, width, t):
        assert psi(lam, lam + width, t) == psi(lam, lam + width, -t)


class TestPsiK:
    def test_zero_limit(self):
        alpha, k = 1.3, 7
        assert psi_k(alpha, k, 0.0) == pytest.approx(
            alpha * (2 * k + 1) / (4 * math.pi), rel=1e-15
        )

    def test_first_sine_zero(self):
        alpha = 0.7
        t = 4.0 * math.pi / alpha
        assert psi_k(alpha, 3, t) == pytest.approx(0.0, abs=1e-15)

    def test_rejects_k_zero(self):
        with pytest.raises(ValueError):
            psi_k(1.0, 0, 0.5)

    @settings(max_examples=200, deadline=None)
    @given(
        alpha=st.floats(0.1, 5.0),
        k=st.integers(1, 80),
        t=st.floats(-50.0, 50.0),
    )
    def test_matches_general_kernel(self, alpha, k, t):
        a = psi_k(alpha, k, t)
        b = psi(0.5 * alpha * k, 0.5 * alpha * (k + 1), t)
        assert a == pytest.approx(b, abs=1e-12)


class TestPartialSumDirect:
    def test_truncation(self):
        f = QuasiPeriodicFunction(
            Spectrum.from_cos_sin(1.0, [(1.0, 1.0, 0.0), (2.0, 1.0, 0.0)])
        )
        assert partial_sum_direct(f, 1.5, 0.0) == 1.0

    def test_full_sum(self):
        assert partial_sum_direct(SMOOTH, 10.0, 0.3) == SMOOTH(0.3)
        assert partial_sum_direct(SMOOTH, 99.0, 0.3) == SMOOTH(0.3)

    def test_gamma_zero_without_dc(self):
        assert partial_sum_direct(SMOOTH, 0.0, 1.7) == 0.0


class TestGapFree:
    def test_integer_ladder(self):
        f = QuasiPeriodicFunction(
            Spectrum.from_cos_sin(1.0, [(0.0, 1.0, 0.0), (1.0, 1.0, 0.0), (2.0, 1.0, 0.0)])
        )
        # open band (0.5, 1.0) excludes the boundary frequency 1
        assert gap_free(f, 1)

    def test_band_with_interior_frequency(self):
        assert not gap_free(IRRATIONAL, 8)

    def test_dc_only_always_free(self):
        for k in range(0, 10):
            assert gap_free(CONST, k)


class TestKernelRoute:
    def test_constant_forces_normalization(self):
        got = partial_sum_kernel(CONST, 1, 17.2)
        assert got == pytest.approx(1.0, abs=1e-9)

    def test_cos_matches_direct(self):
        cfg = QuadratureConfig()
        got = partial_sum_kernel(COS, 4, 0.7, cfg)
        want = partial_sum_direct(COS, 2.0, 0.7)
        assert got == pytest.approx(want, abs=max(cfg.abs_tol, cfg.rel_tol * abs(want)))

    def test_band_shift_matches_direct(self):
        # k = 8 band holds sqrt(2)*pi, so the route goes through band 9
        ks = list(range(1, 65))
        got = partial_sum_kernel_sweep(IRRATIONAL, ks, 0.3)
        want = np.array(
            [partial_sum_direct(IRRATIONAL, 0.5 * k, 0.3) for k in ks]
        )
        np.testing.assert_allclose(got, want, atol=1e-9)

    def test_smooth_sweep(self):
        ks = [1, 2, 3, 19, 20, 21, 40]
        got = partial_sum_kernel_sweep(SMOOTH, ks, 0.7)
        want = np.array([partial_sum_direct(SMOOTH, 0.5 * k, 0.7) for k in ks])
        np.testing.assert_allclose(got, want, atol=1e-9)

    def test_rejects_k_zero(self):
        with pytest.raises(ValueError):
            partial_sum_kernel(SMOOTH, 0, 0.0)

    def test_tolerance_error_carries_estimate(self):
        cfg = QuadratureConfig(abs_tol=1e-18, rel_tol=1e-18)
        with pytest.raises(QuadratureToleranceError) as err:
            partial_sum_kernel(SMOOTH, 3, 0.1, cfg)
        assert err.value.error_estimate > 1e-18
        assert math.isfinite(err.value.value)


class TestKernelMass:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("k", [1, 2, 9, 33])
    def test_half(self, alpha, k):
        assert kernel_mass(alpha, k) == pytest.approx(0.5, abs=1e-6)

    def test_tail_bound_scale(self):
        # dropped-tail bound for the default truncation stays conservative
        T = QuadratureConfig().resolve_truncation(1.0)
        assert tail_bound(SMOOTH, T) == pytest.approx(
            8.0 * 1.1 / (math.pi * T), rel=1e-12
        )
