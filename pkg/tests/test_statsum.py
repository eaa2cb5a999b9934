"""Statistical-sum concentration study: exact degenerate cases, moment
checks, the complement symmetry, and the finite-n radius arithmetic."""

import math
import statistics

import numpy as np
import pytest

from bsclab.logmath import LN2
from bsclab.statsum import (
    FiniteRadius,
    SAMPLE_M_CAP,
    StatSumSample,
    finite_n_radius,
    sample_statsum,
    theorem2_check,
    typical_log_statsum,
)


class TestSampleStatsum:
    def test_z_one_exact(self):
        draws = sample_statsum(1.0, 30, 25, 50, seed=1)
        for s in draws:
            assert s.ln_S == pytest.approx(math.log(30), abs=1e-12)
            assert s.deviation == pytest.approx(0.0, abs=1e-12)

    def test_single_term_mean(self):
        # M = 1: ln S = w ln z with w ~ Bin(n, 1/2)
        z, n, samples = 0.2, 64, 4000
        draws = sample_statsum(z, 1, n, samples, seed=2)
        mean = statistics.fmean(s.ln_S for s in draws)
        sigma = math.sqrt(n / 4.0) * abs(math.log(z)) / math.sqrt(samples)
        assert abs(mean - (n / 2.0) * math.log(z)) <= 4.0 * sigma

    def test_first_moment_of_s(self):
        # E S = M ((1+z)/2)^n; Var S = M(((1+z^2)/2)^n - ((1+z)/2)^(2n)).
        # The analytic se is required: S is so heavy-tailed that the sample
        # variance misses the rare low weights that carry the mean.
        z, M, n, samples = 1.0 / 9.0, 55, 40, 4000
        draws = sample_statsum(z, M, n, samples, seed=3)
        vals = np.array([math.exp(s.ln_S) for s in draws])
        want = M * ((1.0 + z) / 2.0) ** n
        var = M * (((1.0 + z * z) / 2.0) ** n - ((1.0 + z) / 2.0) ** (2 * n))
        se = math.sqrt(var / samples)
        assert abs(vals.mean() - want) <= 4.0 * se

    def test_largest_term_lower_bound(self):
        # every term is at least z^n when z < 1, so S >= M z^n
        z, M, n = 0.3, 20, 30
        for s in sample_statsum(z, M, n, 100, seed=4):
            assert s.ln_S >= math.log(M) + n * math.log(z) - 1e-9

    def test_complement_pairs_with_inverse_z(self):
        # deviations under z and 1/z coincide exactly for paired streams
        z, M, n, samples = 1.0 / 9.0, 55, 40, 200
        direct = sample_statsum(z, M, n, samples, seed=5)
        paired = sample_statsum(1.0 / z, M, n, samples, seed=5, complement=True)
        for a, b in zip(direct, paired):
            assert b.deviation == pytest.approx(a.deviation, abs=1e-9)
            assert b.threshold == pytest.approx(a.threshold, abs=1e-12)

    def test_multinomial_path_matches_moments(self):
        # push past the direct-draw limit and verify the first moment still
        z, M, n, samples = 0.5, 200000, 24, 40
        draws = sample_statsum(z, M, n, samples, seed=6)
        vals = np.array([math.exp(s.ln_S) for s in draws])
        want = M * ((1.0 + z) / 2.0) ** n
        var = M * (((1.0 + z * z) / 2.0) ** n - ((1.0 + z) / 2.0) ** (2 * n))
        se = math.sqrt(var / samples)
        assert abs(vals.mean() - want) <= 4.0 * se

    def test_cap_and_validation(self):
        with pytest.raises(ValueError):
            sample_statsum(0.5, SAMPLE_M_CAP + 1, 10, 1, seed=0)
        with pytest.raises(ValueError):
            sample_statsum(-1.0, 5, 10, 1, seed=0)

    def test_fields(self):
        s = sample_statsum(0.25, 8, 12, 1, seed=7)[0]
        assert isinstance(s, StatSumSample)
        assert s.threshold == pytest.approx(
            math.sqrt(12 * math.log(13)) * abs(math.log(0.25)), abs=1e-12
        )


class TestTheorem2Check:
    def test_z_one_no_violations(self):
        res = theorem2_check(1.0, 0.1, 40, 200, seed=1)
        assert res.violation_frequency == 0.0

    def test_pinned_threshold(self):
        res = theorem2_check(1.0 / 9.0, 0.1, 40, 50, seed=2)
        assert res.M == 55
        assert res.threshold == pytest.approx(26.78, abs=0.01)
        assert res.ln_bound == pytest.approx(-55 * math.log(41), abs=1e-9)

    def test_warns_below_stated_range(self):
        with pytest.warns(UserWarning):
            theorem2_check(0.5, 0.2, 8, 20, seed=3)

    def test_violation_frequency_in_unit_interval(self):
        res = theorem2_check(1.0 / 9.0, 0.1, 40, 500, seed=4)
        assert 0.0 <= res.violation_frequency <= 1.0


class TestTypicalPredictor:
    def test_z_one_gives_rate(self):
        per_symbol, b_star = typical_log_statsum(1.0, 0.2)
        assert per_symbol == pytest.approx(0.2, abs=1e-9)
        assert b_star == pytest.approx(0.5, abs=1e-4)

    def test_pinned_value(self):
        # frozen from the kinked-concave maximizer: the argmax clamps to
        # delta_R = 0.280205..., giving delta_R * ln(1/9)
        per_symbol, b_star = typical_log_statsum(1.0 / 9.0, 0.1)
        assert b_star == pytest.approx(0.2802053, abs=1e-5)
        assert per_symbol == pytest.approx(b_star * math.log(1.0 / 9.0), abs=1e-9)
        assert per_symbol == pytest.approx(-0.6156741, abs=1e-6)

    def test_decreasing_in_small_z(self):
        vals = [typical_log_statsum(z, 0.1)[0] for z in (0.5, 0.1, 0.01, 0.001)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            typical_log_statsum(0.5, LN2 + 0.1)


class TestFiniteRadius:
    def test_m2_drops_competitor_term(self):
        for n in (10, 100, 1000):
            r = finite_n_radius(n, 0.2, 2)
            assert r.r == pytest.approx(0.5 - math.sqrt(math.log(n + 1) / n), abs=1e-12)

    def test_pinned_example(self):
        r = finite_n_radius(40, 1.0 / 9.0, 55)
        assert r.r == pytest.approx(0.1499, abs=5e-4)

    def test_converges_to_r0(self):
        # r - r0 is -sqrt(ln(n+1)/n) plus a vanishing ln((M-1)/M)/(n ln z)
        z = 1.0 / 9.0
        for n in (10**2, 10**4, 10**6):
            M = min(10**9, max(2, round(math.exp(min(0.1 * n, 20.0)))))
            rad = finite_n_radius(n, z, M)
            assert isinstance(rad, FiniteRadius)
            assert abs(rad.r - rad.r0) <= 2.0 * math.sqrt(math.log(n + 1) / n)

    def test_validation(self):
        with pytest.raises(ValueError):
            finite_n_radius(10, 1.0, 4)
        with pytest.raises(ValueError):
            finite_n_radius(10, 0.5, 1)
