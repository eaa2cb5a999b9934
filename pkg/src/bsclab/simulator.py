"""Monte Carlo instrument: real random codebooks, BSC noise, minimum-distance
decoding, posterior sampling.

Two estimators of the ensemble-average error probability are provided:
full-ensemble mode materializes codebooks bit by bit, while
distance-sampled mode draws the transmitted distance Bin(n, p) and the
M-1 competitor distances Bin(n, 1/2) directly.  Agreement between the two
is itself one of the facts under test (it witnesses the competitor
distance law the oracle relies on).

All randomness flows through counter-based Philox streams keyed by
(master seed, purpose, block index), so every estimate is reproducible
and independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .oracle import TiePolicy
from .rng import philox_stream

__all__ = [
    "PackedCode",
    "TrialSummary",
    "MaxErrorStudy",
    "PosteriorDraws",
    "MEMORY_CAP_BYTES",
    "generate_code",
    "bsc_transmit",
    "ml_decode",
    "estimate_error_probability",
    "estimate_max_error",
    "sample_posterior",
]

MEMORY_CAP_BYTES = 2 * 2**30
_CHUNK_TRIALS = 4096  # fixed block size; part of the deterministic stream layout
_DIRECT_COMPETITOR_LIMIT = 20_000_000  # (M-1)*trials above this uses multinomials
_SIM_LOG_M_CAP = 40.0  # refuse codebooks beyond e^40 messages


def _limbs(n: int) -> int:
    return (n + 63) // 64


def _last_limb_mask(n: int) -> np.uint64:
    rem = n % 64
    return np.uint64(0xFFFFFFFFFFFFFFFF if rem == 0 else (1 << rem) - 1)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., n) array of 0/1 into (..., ceil(n/64)) uint64 limbs."""
    n = bits.shape[-1]
    target = _limbs(n) * 8
    by = np.packbits(bits.astype(np.uint8), axis=-1, bitorder="little")
    if by.shape[-1] < target:
        pad = np.zeros(bits.shape[:-1] + (target - by.shape[-1],), dtype=np.uint8)
        by = np.concatenate([by, pad], axis=-1)
    return by.view(np.uint64)


def hamming_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Popcount of the limb-wise XOR, summed over the limb axis."""
    return np.bitwise_count(np.bitwise_xor(a, b)).sum(axis=-1, dtype=np.int64)


@dataclass(frozen=True)
class PackedCode:
    """M codewords of n bits, bit-packed into 64-bit limbs."""

    n: int
    M: int
    words: np.ndarray  # (M, limbs) uint64; bits beyond n are zero
    seed: int

    def distances(self, y: np.ndarray) -> np.ndarray:
        return hamming_distance(self.words, y)


def generate_code(n: int, M: int, seed: int) -> PackedCode:
    """Fresh iid fair-bit codebook; row r is regenerated from (seed, r)."""
    if n < 1 or M < 1:
        raise ValueError("n and M must be >= 1")
    limbs = _limbs(n)
    if M * limbs * 8 > MEMORY_CAP_BYTES:
        raise MemoryError(f"codebook of {M}x{n} bits exceeds the configured cap")
    words = np.empty((M, limbs), dtype=np.uint64)
    for r in range(M):
        gen = philox_stream(seed, "code", r)
        words[r] = gen.integers(0, 2**64, size=limbs, dtype=np.uint64)
    words[:, -1] &= _last_limb_mask(n)
    return PackedCode(n=n, M=M, words=words, seed=seed)


def bsc_transmit(x: np.ndarray, n: int, p: float, noise_seed: int) -> np.ndarray:
    """Flip each of the n bits of x independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    gen = philox_stream(noise_seed, "noise")
    flips = gen.random(n) < p
    return np.bitwise_xor(x, pack_bits(flips[None, :])[0])


def ml_decode(
    code: PackedCode,
    y: np.ndarray,
    tie: TiePolicy,
    coin_seed: int = 0,
) -> Tuple[Optional[int], int]:
    """Index of a minimum-distance codeword and the minimum distance.

    Under TIES_AS_ERROR a non-unique minimum returns index None (any tie
    counts against the transmitted word); under RANDOM_TIE_BREAK a uniform
    choice among the minimizers is made from coin_seed.
    """
    d = code.distances(y)
    dmin = int(d.min())
    idx = np.flatnonzero(d == dmin)
    if idx.size == 1:
        return int(idx[0]), dmin
    if tie is TiePolicy.TIES_AS_ERROR:
        return None, dmin
    gen = philox_stream(coin_seed, "coin")
    return int(idx[gen.integers(0, idx.size)]), dmin


def _codebook_size(R: float, n: int) -> int:
    x = R * n
    if x > _SIM_LOG_M_CAP:
        raise ValueError(f"M = e^{x:.1f} exceeds the simulation cap")
    return max(2, round(math.exp(x)))


def _tie_errors(
    d_m: np.ndarray,
    dmin: np.ndarray,
    eq_count: np.ndarray,
    tie: TiePolicy,
    coins: Optional[np.ndarray],
) -> np.ndarray:
    if tie is TiePolicy.TIES_AS_ERROR:
        return dmin <= d_m
    tied = dmin == d_m
    lose = np.zeros(d_m.shape, dtype=bool)
    if tied.any():
        k = eq_count[tied].astype(np.float64)
        lose[tied] = coins[tied] < k / (k + 1.0)
    return (dmin < d_m) | lose


def _summary(trials: int, errors: int, mode: str, tie: TiePolicy, lineage: str) -> "TrialSummary":
    est = errors / trials
    ci = 1.96 * math.sqrt(est * (1.0 - est) / trials)
    return TrialSummary(
        trials=trials,
        errors=errors,
        estimate=est,
        ci_half_width=ci,
        mode=mode,
        tie=tie,
        seed_lineage=lineage,
    )


@dataclass(frozen=True)
class TrialSummary:
    trials: int
    errors: int
    estimate: float
    ci_half_width: float  # 95% normal approximation
    mode: str  # "full-ensemble" | "distance-sampled" | "max-over-messages"
    tie: TiePolicy
    seed_lineage: str


def estimate_error_probability(
    p: float,
    R: float,
    n: int,
    trials: int,
    mode: str,
    tie: TiePolicy,
    seed: int,
) -> TrialSummary:
    """Monte Carlo estimate of the ensemble-average error probability."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p={p} outside [0, 1/2]")
    M = _codebook_size(R, n)
    if mode == "distance-sampled":
        errors = _run_distance_sampled(p, n, M, trials, tie, seed)
    elif mode == "full-ensemble":
        errors = _run_full_ensemble(p, n, M, trials, tie, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _summary(trials, errors, mode, tie, f"philox:{seed}")


def _run_distance_sampled(p, n, M, trials, tie, seed) -> int:
    K = M - 1
    gen = philox_stream(seed, "distance")
    coins = philox_stream(seed, "coin").random(trials)
    d_m = gen.binomial(n, p, size=trials)
    if K * trials <= _DIRECT_COMPETITOR_LIMIT:
        comp = gen.binomial(n, 0.5, size=(trials, K))
        dmin = comp.min(axis=1)
        eq = (comp == d_m[:, None]).sum(axis=1)
    else:
        # same law, O(n) per trial: multinomial counts over the weight pmf
        from .logmath import LN2, binomial_table

        pmf = np.exp(binomial_table(n).log_choose - n * LN2)
        pmf = pmf / pmf.sum()
        counts = gen.multinomial(K, pmf, size=trials)
        rows = np.arange(trials)
        eq = counts[rows, d_m]
        dmin = np.argmax(counts > 0, axis=1)  # first populated weight; K >= 1
    err = _tie_errors(d_m, dmin, eq, tie, coins)
    return int(err.sum())


def _run_full_ensemble(p, n, M, trials, tie, seed) -> int:
    limbs = _limbs(n)
    if M * limbs * 8 > MEMORY_CAP_BYTES:
        raise MemoryError("full-ensemble mode refused: codebook above memory cap")
    chunk = max(1, min(_CHUNK_TRIALS, MEMORY_CAP_BYTES // (M * limbs * 8)))
    mask = _last_limb_mask(n)
    errors = 0
    done = 0
    block = 0
    while done < trials:
        t = min(chunk, trials - done)
        words = philox_stream(seed, "code", block).integers(
            0, 2**64, size=(t, M, limbs), dtype=np.uint64
        )
        words[:, :, -1] &= mask
        flips = philox_stream(seed, "noise", block).random((t, n)) < p
        y = np.bitwise_xor(words[:, 0, :], pack_bits(flips))
        d = hamming_distance(words, y[:, None, :])
        d_m = d[:, 0]
        comp = d[:, 1:]
        dmin = comp.min(axis=1)
        eq = (comp == d_m[:, None]).sum(axis=1)
        coins = philox_stream(seed, "coin", block).random(t)
        errors += int(_tie_errors(d_m, dmin, eq, tie, coins).sum())
        done += t
        block += 1
    return errors


@dataclass(frozen=True)
class MaxErrorStudy:
    max_error: TrialSummary
    message_average: TrialSummary


def estimate_max_error(
    p: float,
    R: float,
    n: int,
    codes: int,
    noise_trials_per_message: int,
    seed: int,
    tie: TiePolicy = TiePolicy.TIES_AS_ERROR,
    code: Optional[PackedCode] = None,
) -> MaxErrorStudy:
    """Average over codes of the worst-message error rate, next to the
    plain message average.  A fixed code can be injected for testing."""
    T = noise_trials_per_message
    if codes < 1 or T < 1:
        raise ValueError("codes and noise_trials_per_message must be >= 1")
    M = code.M if code is not None else _codebook_size(R, n)
    limbs = _limbs(n)
    max_errors = 0
    all_errors = 0
    if code is not None:
        codes = 1
    for c in range(codes):
        if code is not None:
            words = code.words
        else:
            gen = philox_stream(seed, "max-error", c)
            words = gen.integers(0, 2**64, size=(M, limbs), dtype=np.uint64)
            words[:, -1] &= _last_limb_mask(n)
        per_message = []
        for m in range(M):
            idx = c * M + m
            flips = philox_stream(seed, "noise", idx).random((T, n)) < p
            y = np.bitwise_xor(words[m], pack_bits(flips))
            d = hamming_distance(words[None, :, :], y[:, None, :])
            d_m = d[:, m]
            comp = np.delete(d, m, axis=1)
            if comp.size == 0:
                per_message.append(0)
                continue
            dmin = comp.min(axis=1)
            eq = (comp == d_m[:, None]).sum(axis=1)
            coins = philox_stream(seed, "coin", idx).random(T)
            per_message.append(int(_tie_errors(d_m, dmin, eq, tie, coins).sum()))
        max_errors += max(per_message)
        all_errors += sum(per_message)
    lineage = f"philox:{seed}/max-error"
    return MaxErrorStudy(
        max_error=_summary(codes * T, max_errors, "max-over-messages", tie, lineage),
        message_average=_summary(codes * M * T, all_errors, "full-ensemble", tie, lineage),
    )


@dataclass(frozen=True)
class PosteriorDraws:
    """Per-sample transmitted distance, competitor sum, posterior, error."""

    d_m: np.ndarray
    ln_T: np.ndarray
    pi_m: np.ndarray
    error: np.ndarray

    def __len__(self) -> int:
        return self.d_m.shape[0]

    def __iter__(self):
        return iter(zip(self.d_m, self.ln_T, self.pi_m, self.error))


def sample_posterior(p: float, R: float, n: int, samples: int, seed: int) -> PosteriorDraws:
    """Joint draws of (d_m, ln T, pi_m, error flag) for the true message."""
    if not 0.0 < p <= 0.5:
        raise ValueError("posterior sampling needs p in (0, 1/2]")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M = _codebook_size(R, n)
    K = M - 1
    ln_z = math.log(p / (1.0 - p))
    gen = philox_stream(seed, "posterior")
    d_m = gen.binomial(n, p, size=samples)
    if K * samples <= _DIRECT_COMPETITOR_LIMIT:
        comp = gen.binomial(n, 0.5, size=(samples, K))
        terms = comp * ln_z
        dmin = comp.min(axis=1)
    else:
        from .logmath import LN2, binomial_table

        pmf = np.exp(binomial_table(n).log_choose - n * LN2)
        counts = gen.multinomial(K, pmf / pmf.sum(), size=samples)
        with np.errstate(divide="ignore"):
            terms = np.arange(n + 1) * ln_z + np.log(counts)
        dmin = np.argmax(counts > 0, axis=1)
    m = terms.max(axis=1)
    ln_T = m + np.log(np.exp(terms - m[:, None]).sum(axis=1))
    pi_m = 1.0 / (1.0 + np.exp(ln_T - d_m * ln_z))
    error = dmin <= d_m
    return PosteriorDraws(d_m=d_m, ln_T=ln_T, pi_m=pi_m, error=error)
