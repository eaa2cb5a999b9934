"""Monte Carlo machinery: bit packing, decoding, estimator agreement with
the exact oracle, and stream determinism."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsclab.oracle import TiePolicy, exact_error_probability, log_codebook_size
from bsclab.simulator import (
    MaxErrorStudy,
    PackedCode,
    TrialSummary,
    bsc_transmit,
    estimate_error_probability,
    estimate_max_error,
    generate_code,
    hamming_distance,
    ml_decode,
    pack_bits,
    sample_posterior,
)


class TestBitPacking:
    @settings(max_examples=50)
    @given(st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=200))
    def test_popcount_matches_python(self, bits):
        arr = np.array([bits], dtype=np.uint8)
        packed = pack_bits(arr)
        zero = np.zeros_like(packed)
        assert int(hamming_distance(packed, zero)[0]) == sum(bits)

    @settings(max_examples=30)
    @given(
        st.integers(min_value=1, max_value=130),
        st.integers(min_value=0, max_value=2**32),
    )
    def test_xor_distance(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 2, size=(1, n), dtype=np.uint8)
        b = rng.integers(0, 2, size=(1, n), dtype=np.uint8)
        want = int((a ^ b).sum())
        assert int(hamming_distance(pack_bits(a), pack_bits(b))[0]) == want


class TestGenerateCode:
    def test_shape_and_determinism(self):
        c1 = generate_code(100, 8, seed=3)
        c2 = generate_code(100, 8, seed=3)
        assert c1.words.shape == (8, 2)
        assert np.array_equal(c1.words, c2.words)

    def test_rows_keyed_independently(self):
        # row r is a pure function of (seed, r): prefixes agree across M
        small = generate_code(64, 3, seed=9)
        large = generate_code(64, 6, seed=9)
        assert np.array_equal(small.words, large.words[:3])

    def test_padding_bits_zero(self):
        c = generate_code(65, 4, seed=1)
        assert int(c.words[:, -1].max()) <= 1  # only bit 64 may be set

    def test_weight_distribution_sane(self):
        c = generate_code(128, 400, seed=5)
        w = np.bitwise_count(c.words).sum(axis=1)
        assert abs(w.mean() - 64.0) < 4.0 * math.sqrt(32.0 / 400.0)

    def test_memory_cap(self):
        with pytest.raises(MemoryError):
            generate_code(2**20, 2**15, seed=0)


class TestTransmitDecode:
    def test_noiseless_identity(self):
        c = generate_code(40, 4, seed=2)
        y = bsc_transmit(c.words[1], 40, 0.0, noise_seed=7)
        assert np.array_equal(y, c.words[1])

    def test_all_flip(self):
        c = generate_code(40, 2, seed=2)
        y = bsc_transmit(c.words[0], 40, 1.0, noise_seed=7)
        assert int(hamming_distance(y[None], c.words[0][None])[0]) == 40

    def test_decode_own_word_noiseless(self):
        c = generate_code(64, 8, seed=11)
        idx, d = ml_decode(c, c.words[5], TiePolicy.TIES_AS_ERROR)
        assert (idx, d) == (5, 0)

    def test_tie_reported_as_none(self):
        words = generate_code(32, 1, seed=1).words
        dup = PackedCode(n=32, M=2, words=np.vstack([words[0], words[0]]), seed=0)
        idx, d = ml_decode(dup, words[0], TiePolicy.TIES_AS_ERROR)
        assert idx is None and d == 0

    def test_tie_broken_uniformly(self):
        words = generate_code(32, 1, seed=1).words
        dup = PackedCode(n=32, M=2, words=np.vstack([words[0], words[0]]), seed=0)
        picks = [
            ml_decode(dup, words[0], TiePolicy.RANDOM_TIE_BREAK, coin_seed=s)[0]
            for s in range(200)
        ]
        frac = sum(picks) / len(picks)
        assert 0.35 < frac < 0.65


class TestEstimators:
    @pytest.mark.parametrize("mode", ["full-ensemble", "distance-sampled"])
    @pytest.mark.parametrize("tie", [TiePolicy.TIES_AS_ERROR, TiePolicy.RANDOM_TIE_BREAK])
    def test_within_ci_of_oracle(self, mode, tie):
        p, R, n, trials = 0.1, 0.3, 16, 20000
        s = estimate_error_probability(p, R, n, trials, mode, tie, seed=13)
        exact = exact_error_probability(n, log_codebook_size(R, n), p, tie).log_Pe.linear
        assert abs(s.estimate - exact) <= 4.0 * s.ci_half_width

    def test_multinomial_path_within_ci(self):
        # large M * trials forces the multinomial competitor representation
        p, R, n = 0.1, 0.45, 64
        s = estimate_error_probability(p, R, n, 4000, "distance-sampled",
                                       TiePolicy.TIES_AS_ERROR, seed=3)
        exact = exact_error_probability(n, log_codebook_size(R, n), p,
                                        TiePolicy.TIES_AS_ERROR).log_Pe.linear
        assert abs(s.estimate - exact) <= 4.0 * s.ci_half_width

    def test_deterministic_and_summary_invariants(self):
        a = estimate_error_probability(0.1, 0.3, 16, 5000, "full-ensemble",
                                       TiePolicy.TIES_AS_ERROR, seed=21)
        b = estimate_error_probability(0.1, 0.3, 16, 5000, "full-ensemble",
                                       TiePolicy.TIES_AS_ERROR, seed=21)
        assert a == b
        assert isinstance(a, TrialSummary)
        assert a.estimate == a.errors / a.trials
        want_ci = 1.96 * math.sqrt(a.estimate * (1 - a.estimate) / a.trials)
        assert a.ci_half_width == pytest.approx(want_ci, abs=1e-15)

    def test_modes_agree(self):
        kw = dict(p=0.25, R=0.2, n=16, trials=30000, tie=TiePolicy.TIES_AS_ERROR, seed=5)
        full = estimate_error_probability(mode="full-ensemble", **kw)
        dist = estimate_error_probability(mode="distance-sampled", **kw)
        assert abs(full.estimate - dist.estimate) <= full.ci_half_width + dist.ci_half_width

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            estimate_error_probability(0.1, 0.3, 8, 10, "hybrid",
                                       TiePolicy.TIES_AS_ERROR, seed=0)


class TestMaxError:
    def test_duplicated_codewords_always_tie(self):
        base = generate_code(24, 1, seed=4).words
        dup = PackedCode(n=24, M=2, words=np.vstack([base[0], base[0]]), seed=0)
        study = estimate_max_error(0.1, 0.1, 24, codes=3,
                                   noise_trials_per_message=300, seed=6, code=dup)
        assert isinstance(study, MaxErrorStudy)
        assert study.max_error.estimate == 1.0
        assert study.message_average.estimate == 1.0

    def test_duplicated_codewords_random_tie_near_half(self):
        base = generate_code(24, 1, seed=4).words
        dup = PackedCode(n=24, M=2, words=np.vstack([base[0], base[0]]), seed=0)
        study = estimate_max_error(0.1, 0.1, 24, codes=1,
                                   noise_trials_per_message=4000, seed=6,
                                   tie=TiePolicy.RANDOM_TIE_BREAK, code=dup)
        assert abs(study.max_error.estimate - 0.5) < 0.04

    def test_max_at_least_average(self):
        study = estimate_max_error(0.1, 0.2, 20, codes=6,
                                   noise_trials_per_message=400, seed=8)
        assert study.max_error.estimate >= study.message_average.estimate

    def test_average_tracks_ensemble_oracle(self):
        # trials sharing a codebook are correlated, so the binomial CI of
        # the pooled summary understates the spread; bound at the cluster
        # level instead (code-to-code std is below 0.1 here, 120 clusters)
        n, R, p = 16, 0.25, 0.1
        study = estimate_max_error(p, R, n, codes=120,
                                   noise_trials_per_message=60, seed=17)
        exact = exact_error_probability(n, log_codebook_size(R, n), p,
                                        TiePolicy.TIES_AS_ERROR).log_Pe.linear
        avg = study.message_average
        assert avg.trials == 120 * round(math.exp(R * n)) * 60
        assert abs(avg.estimate - exact) <= 4.0 * 0.1 / math.sqrt(120)


class TestPosterior:
    def test_fields_and_bounds(self):
        draws = sample_posterior(0.1, 0.3, 32, 2000, seed=9)
        assert len(draws) == 2000
        assert draws.pi_m.min() >= 0.0 and draws.pi_m.max() <= 1.0
        assert draws.d_m.min() >= 0 and draws.d_m.max() <= 32

    def test_error_rate_matches_oracle(self):
        p, R, n = 0.1, 0.3, 32
        draws = sample_posterior(p, R, n, 20000, seed=10)
        exact = exact_error_probability(n, log_codebook_size(R, n), p,
                                        TiePolicy.TIES_AS_ERROR).log_Pe.linear
        se = math.sqrt(exact * (1 - exact) / 20000)
        assert abs(draws.error.mean() - exact) <= 4.0 * se

    def test_posterior_formula_consistency(self):
        p = 0.1
        draws = sample_posterior(p, 0.2, 16, 500, seed=3)
        ln_z = math.log(p / (1 - p))
        want = 1.0 / (1.0 + np.exp(draws.ln_T - draws.d_m * ln_z))
        assert np.allclose(draws.pi_m, want, atol=1e-12)

    def test_iterates_tuples(self):
        draws = sample_posterior(0.1, 0.2, 8, 5, seed=1)
        rows = list(draws)
        assert len(rows) == 5 and len(rows[0]) == 4

    def test_rejects_p_zero(self):
        with pytest.raises(ValueError):
            sample_posterior(0.0, 0.2, 8, 10, seed=0)
