import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apsum.matrices import (
    ClassReport,
    MatrixError,
    SummabilityMatrix,
    cesaro_matrix,
    cesaro_row,
    class_membership,
    explicit_matrix,
    gm2_constant,
    gm_constant,
    is_ms,
    load_matrix,
    matrix_from_dict,
    ms_constant,
    osc_gm2_matrix,
    osc_gm2_row,
    rbvs_constant,
    riesz_matrix,
    side_condition,
)


def brute_rbvs(row):
    """Independent scan straight from the defining inequality."""
    a = list(map(float, row)) + [0.0]
    worst = 0.0
    for m in range(len(a)):
        var = sum(abs(a[k] - a[k + 1]) for k in range(m, len(a) - 1))
        if a[m] > 0:
            worst = max(worst, var / a[m])
        elif var > 0:
            return math.inf
    return worst


def brute_gm(row):
    a = list(map(float, row)) + [0.0]

    def at(i):
        return a[i] if i < len(a) else 0.0

    worst = 0.0
    for m in range(1, len(a) + 1):
        var = sum(abs(at(k) - at(k + 1)) for k in range(m, 2 * m))
        if var == 0:
            continue
        if at(m) == 0:
            return math.inf
        worst = max(worst, var / at(m))
    return worst


def random_rows(rng, count, kind="mixed"):
    rows = []
    for _ in range(count):
        n = int(rng.integers(1, 12))
        vals = rng.uniform(0.05, 1.0, n)
        if kind == "nonincreasing":
            vals = np.sort(vals)[::-1]
        elif kind == "mixed" and rng.random() < 0.4:
            vals[rng.integers(0, n)] = 0.0
        s = vals.sum()
        if s == 0.0:
            vals[0] = 1.0
            s = 1.0
        rows.append(vals / s)
    return rows


class TestCesaroRow:
    def test_n0(self):
        np.testing.assert_array_equal(cesaro_row(0), [1.0])

    def test_n2(self):
        np.testing.assert_allclose(cesaro_row(2), [1 / 3, 1 / 3, 1 / 3], rtol=1e-15)

    def test_row_sum(self):
        assert cesaro_row(10).sum() == pytest.approx(1.0, abs=1e-15)


class TestMS:
    def test_cesaro_is_ms(self):
        assert is_ms(cesaro_row(4))

    def test_increase_fails(self):
        assert not is_ms([0.2, 0.5, 0.3])

    def test_zero_tail_ok(self):
        assert is_ms([0.5, 0.3, 0.2, 0.0, 0.0])

    def test_constant_convention(self):
        assert ms_constant(cesaro_row(0)) == 1.0
        assert ms_constant(cesaro_row(7)) == 1.0
        assert ms_constant([0.2, 0.5, 0.3]) == pytest.approx(2.5)
        assert ms_constant([0.5, 0.0, 0.5]) == math.inf


class TestRBVS:
    def test_nonincreasing_telescopes_to_one(self):
        assert rbvs_constant([0.4, 0.3, 0.2, 0.1]) == pytest.approx(1.0, abs=1e-15)

    def test_zero_interior_sentinel(self):
        assert rbvs_constant([0.5, 0.0, 0.5]) == math.inf

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for row in random_rows(rng, 40):
            assert rbvs_constant(row) == pytest.approx(brute_rbvs(row), rel=1e-12)

    def test_rejects_zero_row(self):
        with pytest.raises(MatrixError):
            rbvs_constant([0.0, 0.0])


class TestGM:
    def test_nonincreasing_at_most_one(self):
        assert gm_constant([0.4, 0.3, 0.2, 0.1]) <= 1.0 + 1e-15

    def test_bounded_by_rbvs(self):
        rng = np.random.default_rng(11)
        for row in random_rows(rng, 40):
            r = rbvs_constant(row)
            if math.isfinite(r):
                assert gm_constant(row) <= r + 1e-12

    def test_alternating_sentinel(self):
        row = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        row /= row.sum()
        assert gm_constant(row) == math.inf

    def test_matches_brute_force(self):
        rng = np.random.default_rng(13)
        for row in random_rows(rng, 40):
            assert gm_constant(row) == pytest.approx(brute_gm(row), rel=1e-12)


class TestGM2:
    def test_cesaro_finite(self):
        k = gm2_constant(cesaro_row(8), 2.0)
        assert math.isfinite(k) and k <= 2.0

    def test_rejects_c_at_most_one(self):
        with pytest.raises(MatrixError):
            gm2_constant(cesaro_row(3), 1.0)

    def test_finite_gm_implies_finite_gm2(self):
        rng = np.random.default_rng(17)
        for row in random_rows(rng, 100):
            if math.isfinite(gm_constant(row)):
                assert math.isfinite(gm2_constant(row, 2.0))

    def test_zero_past_support_contributes_nothing(self):
        row = np.array([0.6, 0.4])
        # blocks beyond the support have zero variation, so the scan ends
        assert math.isfinite(gm2_constant(row, 2.0))


class TestClassMembership:
    def test_cesaro_ms_all_ones(self):
        rep = class_membership(cesaro_matrix(), "ms", 1.0, range(0, 65))
        assert rep.member
        assert set(rep.constants) == {1.0}
        assert rep.side_condition_ok

    def test_fixed_first_weight_flagged(self):
        m = SummabilityMatrix(
            "sticky",
            lambda n: np.concatenate([[1.0], np.zeros(n)]),
            lambda n: n,
        )
        rep = class_membership(m, "ms", 1.0, range(0, 16))
        assert rep.member  # still monotone rows
        assert rep.side_condition_ok is False

    def test_osc_gm2_family(self):
        m = osc_gm2_matrix()
        rep_ms = class_membership(m, "ms", 1.0, range(2, 65))
        rep_gm2 = class_membership(m, "gm2", 8.0, range(2, 65), c=2.0)
        assert not rep_ms.member
        assert rep_gm2.member
        assert rep_gm2.side_condition_ok

    def test_unknown_class(self):
        with pytest.raises(MatrixError):
            class_membership(cesaro_matrix(), "bogus", 1.0, [1])


class TestMatrices:
    def test_row_sum_enforced(self):
        m = SummabilityMatrix("broken", lambda n: np.ones(n + 1), lambda n: n)
        with pytest.raises(MatrixError):
            m.row(3)

    def test_negative_rejected(self):
        m = SummabilityMatrix("neg", lambda n: np.array([1.5, -0.5]), lambda n: 1)
        with pytest.raises(MatrixError):
            m.row(0)

    def test_riesz_weights(self):
        m = riesz_matrix(weights=[1.0, 2.0, 3.0])
        np.testing.assert_allclose(m.row(2), [1 / 6, 2 / 6, 3 / 6], rtol=1e-15)

    def test_riesz_exponent(self):
        m = riesz_matrix(exponent=1.0)
        np.testing.assert_allclose(m.row(2), [1 / 6, 2 / 6, 3 / 6], rtol=1e-15)

    def test_riesz_needs_one_source(self):
        with pytest.raises(MatrixError):
            riesz_matrix()
        with pytest.raises(MatrixError):
            riesz_matrix(weights=[1.0], exponent=2.0)

    def test_osc_gm2_rows(self):
        row = osc_gm2_row(8)
        assert row[0] > 0.0
        assert row[1] == 0.0 and row[3] == 0.0 and row[7] == 0.0
        assert row.sum() == pytest.approx(1.0, abs=1e-15)
        assert not is_ms(row)

    def test_osc_gm2_constructor_check_fails_bad_threshold(self):
        with pytest.raises(MatrixError):
            osc_gm2_matrix(gm2_threshold=0.1)

    def test_explicit_and_file_round_trip(self, tmp_path):
        rows = [[1.0], [0.5, 0.5], [0.2, 0.3, 0.5]]
        path = tmp_path / "mat.json"
        path.write_text(json.dumps({"type": "explicit", "rows": rows}))
        m = load_matrix(path)
        np.testing.assert_allclose(m.row(2), rows[2])
        with pytest.raises(MatrixError):
            m.row(3)

    def test_from_dict_kinds(self):
        assert matrix_from_dict({"type": "cesaro"}).name == "cesaro"
        assert (
            matrix_from_dict({"type": "riesz", "params": {"exponent": 0.5}}).name
            == "riesz"
        )
        assert matrix_from_dict({"type": "osc-gm2"}).name == "osc-gm2"
        with pytest.raises(MatrixError):
            matrix_from_dict({"type": "diagonal"})


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_nonincreasing_rows_telescope(seed):
    rng = np.random.default_rng(seed)
    (row,) = random_rows(rng, 1, kind="nonincreasing")
    assert rbvs_constant(row) == pytest.approx(1.0, abs=1e-12)
    assert gm_constant(row) <= 1.0 + 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_inclusion_chain(seed):
    rng = np.random.default_rng(seed)
    (row,) = random_rows(rng, 1)
    if is_ms(row):
        assert rbvs_constant(row) <= 1.0 + 1e-12
    r = rbvs_constant(row)
    if math.isfinite(r):
        assert gm_constant(row) <= r + 1e-12
    if math.isfinite(gm_constant(row)):
        assert math.isfinite(gm2_constant(row, 2.0))
