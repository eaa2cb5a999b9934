"""Empirical study of the statistical sum S(z, M, n) = sum_j z^(w_j).

The concentration claim under test says |ln(S / (M z^(n/2)))| exceeds
sqrt(n ln(n+1)) |ln z| with probability at most (n+1)^(-M).  The checker
measures violation frequencies; it asserts nothing about the claim itself.
An analytic predictor of the typical value of (1/n) ln S, built from the
populated-weight heuristic, is kept here for contrast and is not part of
the studied material.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .logmath import LN2, binomial_table, bisect_monotone
from .exponents import binary_entropy, maximize_concave
from .rng import philox_stream

__all__ = [
    "StatSumSample",
    "Theorem2Result",
    "FiniteRadius",
    "SAMPLE_M_CAP",
    "sample_statsum",
    "theorem2_check",
    "typical_log_statsum",
    "finite_n_radius",
]

SAMPLE_M_CAP = 10_000_000  # above this, refuse rather than subsample
_DIRECT_DRAW_LIMIT = 2_000_000  # max weights drawn individually per batch


@dataclass(frozen=True)
class StatSumSample:
    z: float
    n: int
    log_M: float
    ln_S: float
    deviation: float  # |ln S - ln M - (n/2) ln z|
    threshold: float  # sqrt(n ln(n+1)) |ln z|


class Theorem2Result(NamedTuple):
    violation_frequency: float
    ln_bound: float  # ln of (n+1)^(-M)
    threshold: float
    n: int
    M: int
    samples: int


class FiniteRadius(NamedTuple):
    r: float  # 1/2 - sqrt(ln(n+1)/n) + ln(M-1)/(n ln z)
    r0: float  # 1/2 + ln(M)/(n ln z)


def _draw_weight_counts(rng, n: int, M: int, samples: int) -> np.ndarray:
    """Counts of each weight 0..n among M iid Bin(n, 1/2) draws per sample.

    For small M the weights are drawn individually; for large M the
    (equivalent in distribution) multinomial over the exact weight law is
    used so the cost is O(n) per sample instead of O(M).
    """
    if M * samples <= _DIRECT_DRAW_LIMIT:
        w = rng.binomial(n, 0.5, size=(samples, M))
        counts = np.zeros((samples, n + 1), dtype=np.int64)
        for i in range(samples):
            counts[i] = np.bincount(w[i], minlength=n + 1)
        return counts
    pmf = np.exp(binomial_table(n).log_choose - n * LN2)
    pmf = pmf / pmf.sum()
    return rng.multinomial(M, pmf, size=samples)


def sample_statsum(
    z: float,
    M: int,
    n: int,
    samples: int,
    seed: int,
    complement: bool = False,
) -> list[StatSumSample]:
    """Draw M iid Bin(n, 1/2) weights per sample and record ln S.

    With complement=True every weight w is replaced by n - w from the same
    stream, which realizes the z <-> 1/z pairing exactly.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    if M < 1 or n < 1 or samples < 1:
        raise ValueError("M, n and samples must be >= 1")
    if M > SAMPLE_M_CAP:
        raise ValueError(f"M={M} above sampling cap {SAMPLE_M_CAP}")
    rng = philox_stream(seed, "statsum")
    counts = _draw_weight_counts(rng, n, M, samples)
    if complement:
        counts = counts[:, ::-1]
    ln_z = math.log(z)
    log_M = math.log(M)
    threshold = math.sqrt(n * math.log(n + 1)) * abs(ln_z)
    center = log_M + 0.5 * n * ln_z
    ks = np.arange(n + 1, dtype=np.float64)
    out = []
    if ln_z == 0.0:
        # all terms are 1: take the exact value so the z = 1 boundary
        # convention (strictly positive deviation) is meaningful
        ln_S = np.log(counts.sum(axis=1).astype(np.float64))
    else:
        with np.errstate(divide="ignore"):
            ln_counts = np.log(counts)
        terms = ks * ln_z + ln_counts  # -inf where count == 0
        m = terms.max(axis=1)
        ln_S = m + np.log(np.exp(terms - m[:, None]).sum(axis=1))
    for i in range(samples):
        out.append(
            StatSumSample(
                z=z,
                n=n,
                log_M=log_M,
                ln_S=float(ln_S[i]),
                deviation=abs(float(ln_S[i]) - center),
                threshold=threshold,
            )
        )
    return out


def theorem2_check(z: float, R: float, n: int, samples: int, seed: int) -> Theorem2Result:
    """Measure how often |ln S - ln(M z^(n/2))| strictly exceeds the
    concentration threshold, with M = round(e^(Rn)).

    Strict ">" is the boundary convention: at z = 1 both deviation and
    threshold are identically 0 and the violation frequency is 0.
    """
    if n < 10:
        warnings.warn(f"n={n} below the stated n >= 10 range; running anyway")
    M = max(1, round(math.exp(R * n)))
    if M > SAMPLE_M_CAP:
        raise ValueError(f"M={M} above sampling cap {SAMPLE_M_CAP}")
    draws = sample_statsum(z, M, n, samples, seed)
    violations = sum(1 for s in draws if s.deviation > s.threshold)
    return Theorem2Result(
        violation_frequency=violations / samples,
        ln_bound=-M * math.log(n + 1),
        threshold=draws[0].threshold,
        n=n,
        M=M,
        samples=samples,
    )


def typical_log_statsum(z: float, R: float) -> tuple[float, float]:
    """Populated-weight predictor of the typical per-symbol value of ln S.

    Weights with expected multiplicity >= 1 span b in [delta_R, 1-delta_R];
    the typical (1/n) ln S is the max there of R - ln 2 + h(b) + b ln z.
    Returns (per_symbol, b_star).
    """
    if z <= 0:
        raise ValueError("z must be positive")
    if not 0 < R <= LN2:
        raise ValueError(f"rate {R} outside (0, ln 2]")
    if R == LN2:
        delta = 0.0
    else:
        delta = bisect_monotone(binary_entropy, 0.0, 0.5, LN2 - R, tol=1e-300)
    ln_z = math.log(z)
    obj = lambda bs: R - LN2 + binary_entropy(bs) + bs * ln_z
    b_star, per_symbol = maximize_concave(obj, delta, 1.0 - delta)
    return per_symbol, b_star


def finite_n_radius(n: int, z: float, M: int) -> FiniteRadius:
    """Minimal relative distance at which decoding error becomes possible
    at finite n, evaluated literally and unclamped, together with its
    asymptotic counterpart r0 (using R = ln(M)/n)."""
    if z <= 0 or z == 1.0:
        raise ValueError("z must be positive and != 1")
    if M < 2:
        raise ValueError("M must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    ln_z = math.log(z)
    r = 0.5 - math.sqrt(math.log(n + 1) / n) + math.log(M - 1) / (n * ln_z)
    r0 = 0.5 + math.log(M) / (n * ln_z)
    return FiniteRadius(r=r, r0=r0)
