import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpboot import (
    EstimateResult,
    EstimatorKind,
    PublicationRecord,
    estimate_result,
    mncs,
    pp_top10,
    sample_variance,
    se_mean_fpc,
    unit_values,
)

scores = st.lists(st.floats(0.0, 50.0, allow_nan=False), min_size=1, max_size=60)
flags = st.lists(st.booleans(), min_size=1, max_size=60)


class TestMncs:
    def test_constant(self):
        assert mncs([1.0, 1.0, 1.0]) == 1.0

    def test_two_point_mean(self):
        assert mncs([0.0, 2.55]) == pytest.approx(1.275, abs=1e-15)

    def test_records_accepted(self):
        recs = [PublicationRecord(2.0, False), PublicationRecord(4.0, True)]
        assert mncs(recs) == 3.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mncs([])

    @given(scores)
    def test_permutation_invariant(self, values):
        shuffled = list(reversed(values))
        assert mncs(values) == pytest.approx(mncs(shuffled), rel=1e-12, abs=1e-12)

    @given(scores, scores)
    def test_concatenation_is_weighted_mean(self, a, b):
        combined = mncs(a + b)
        weighted = (len(a) * mncs(a) + len(b) * mncs(b)) / (len(a) + len(b))
        assert combined == pytest.approx(weighted, rel=1e-9, abs=1e-9)


class TestPpTop10:
    def test_one_in_ten(self):
        assert pp_top10([True] + [False] * 9) == 10.0

    def test_all_false(self):
        assert pp_top10([False] * 7) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            pp_top10([])

    @given(flags)
    def test_range_and_flag_mean_identity(self, values):
        pp = pp_top10(values)
        assert 0.0 <= pp <= 100.0
        as_scores = 100.0 * mncs([1.0 if v else 0.0 for v in values])
        assert pp == pytest.approx(as_scores, rel=1e-12, abs=1e-12)


class TestSampleVariance:
    def test_textbook(self):
        assert sample_variance([1.0, 2.0, 3.0]) == 1.0

    def test_constant_is_exact_zero(self):
        assert sample_variance([2.7] * 9) == 0.0

    def test_hand_computed(self):
        # mean 1, squared deviations 1+1+1+9, divided by 3
        assert sample_variance([0.0, 0.0, 0.0, 4.0]) == 4.0

    def test_too_short(self):
        with pytest.raises(ValueError):
            sample_variance([1.0])


class TestSeMeanFpc:
    def test_worked_example(self):
        # 0.2 * sqrt(6124 / 6223)
        assert se_mean_fpc(4.0, 100, 6224) == pytest.approx(0.19840, abs=1e-5)

    def test_census_is_zero(self):
        assert se_mean_fpc(3.7, 500, 500) == 0.0

    def test_zero_variance(self):
        assert se_mean_fpc(0.0, 10, 100) == 0.0

    def test_oversize_rejected(self):
        with pytest.raises(ValueError):
            se_mean_fpc(1.0, 101, 100)

    @given(st.floats(0.0, 100.0), st.integers(2, 400))
    @settings(max_examples=50)
    def test_matches_formula(self, s2, n):
        N = 400
        expected = math.sqrt(s2 / n) * math.sqrt((N - n) / (N - 1))
        assert se_mean_fpc(s2, n, N) == pytest.approx(expected, rel=1e-12, abs=1e-300)


class TestEstimateResult:
    def test_fields(self):
        res = estimate_result(EstimatorKind.PP_TOP10, [True, False, False, False])
        assert res == EstimateResult(EstimatorKind.PP_TOP10, 25.0, 4)

    def test_unit_values_scale(self):
        vals = unit_values(EstimatorKind.PP_TOP10, [True, False])
        assert vals.tolist() == [100.0, 0.0]
        vals = unit_values(EstimatorKind.MNCS, [1.5, 2.5])
        assert vals.tolist() == [1.5, 2.5]

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            EstimateResult(EstimatorKind.PP_TOP10, 101.0, 3)
        with pytest.raises(ValueError):
            EstimateResult(EstimatorKind.MNCS, -0.1, 3)
