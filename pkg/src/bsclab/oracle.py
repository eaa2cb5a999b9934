"""Exact ensemble-average decoding error probability for random coding.

For the iid equiprobable ensemble the M-1 competitor distances to the
received word are iid Bin(n, 1/2), independent of the transmitted word's
own distance, so P_e = sum_d P{d_m = d} P{error | d} is exact with no
sampling and no asymptotics.  M is carried as ln M throughout: at rate R
the codebook size e^(Rn) overflows every native representation long
before block lengths of interest.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .logmath import LN2, NEG_INF, LogReal, _lse_array, binomial_table, log1mexp
from .statsum import finite_n_radius

__all__ = [
    "TiePolicy",
    "OracleResult",
    "ExponentFit",
    "error_prob_given_distance",
    "exact_error_probability",
    "exponent_fit",
    "fit_log_decay",
    "log_codebook_size",
]

_PER_DISTANCE_WINDOW = 40.0  # keep d-contributions within e^-40 of the peak
_SERIES_CUTOFF = math.log(30.0)  # tie-break small-error series regime
_SERIES_MAX_TERMS = 400


class TiePolicy(enum.Enum):
    TIES_AS_ERROR = "error"
    RANDOM_TIE_BREAK = "random"


def log_codebook_size(R: float, n: int) -> float:
    """ln M for M = round(e^(Rn)), never below 2."""
    x = R * n
    if x > 40.0:
        return x
    return math.log(max(2, round(math.exp(x))))


def _ln_competitors(log_M: float) -> float:
    """ln(M - 1) from ln M, stable for astronomically large M."""
    if log_M < 0:
        raise ValueError("need M >= 1 (log_M >= 0)")
    if log_M == 0.0:
        return NEG_INF
    return log_M + math.log1p(-math.exp(-log_M))


def _ln_neg_ln_one_minus(ln_x: float) -> float:
    """ln(-ln(1 - X)) given ln X, for X in [0, 1]."""
    if ln_x == NEG_INF:
        return NEG_INF
    if ln_x == 0.0:
        return math.inf
    if ln_x < -37.0:
        return ln_x  # -ln(1-X) ~ X
    return math.log(-log1mexp(ln_x))


def _ln_one_minus_exp_neg(ln_T: float) -> float:
    """ln(1 - e^(-T)) given ln T, for T >= 0."""
    if ln_T == NEG_INF:
        return NEG_INF
    if ln_T == math.inf:
        return 0.0
    if ln_T <= -37.0:
        return ln_T  # 1 - e^-T ~ T
    if ln_T >= 37.0:
        return 0.0
    return log1mexp(-math.exp(ln_T))


def _ln_one_minus_pow(ln_x: float, ln_N: float) -> float:
    """ln(1 - (1 - X)^N) with both X and N supplied in logs."""
    w = _ln_neg_ln_one_minus(ln_x)
    if w == NEG_INF or ln_N == NEG_INF:
        return NEG_INF
    return _ln_one_minus_exp_neg(ln_N + w)


def _ln_pow_one_minus(ln_x: float, ln_N: float) -> float:
    """ln((1 - X)^N) with both X and N supplied in logs."""
    w = _ln_neg_ln_one_minus(ln_x)
    if w == NEG_INF or ln_N == NEG_INF:
        return 0.0
    s = ln_N + w
    if s > 709.0:
        return NEG_INF
    return -math.exp(s)


def _ln_pow_s(ln_s: float, ln_N: float) -> float:
    """ln(s^N) with s given as ln s in [-inf, 0] and N in logs."""
    if ln_N == NEG_INF or ln_s == 0.0:
        return 0.0
    if ln_s == NEG_INF:
        return NEG_INF
    s = ln_N + math.log(-ln_s)
    if s > 709.0:
        return NEG_INF
    return -math.exp(s)


def _ln_binom_coeff(ln_K: float, j: int) -> float:
    """ln C(K, j) with K given as ln K; used for j far below K."""
    acc = 0.0
    for i in range(j):
        acc += ln_K + math.log1p(-i * math.exp(-ln_K))
    return acc - math.lgamma(j + 1)


def _random_tie_error(lnF_d: float, lnF_dm1: float, ln_t: float, log_M: float) -> float:
    """ln P{error} under uniform tie-breaking among all minimizers.

    Correct-decoding probability is [(t+s)^M - s^M]/(M t) with
    t = P{Bin(n,1/2) = d} and s = P{Bin(n,1/2) > d}.  Complementing that
    cancels catastrophically when the error is tiny, so the small regime
    is summed directly over the number of beating/tying competitors.
    """
    ln_K = _ln_competitors(log_M)
    if ln_K == NEG_INF:
        return NEG_INF  # M = 1: no competitors
    ln_s = log1mexp(lnF_d)
    K_lin = math.expm1(log_M) if log_M < 40.0 else math.inf
    integer_K = K_lin is math.inf or abs(K_lin - round(K_lin)) < 1e-9
    if ln_K + lnF_d <= _SERIES_CUTOFF and integer_K:
        # error = [1 - (1-u)^K] + sum_{j>=1} C(K,j) t^j s^(K-j) j/(j+1)
        terms = [_ln_one_minus_pow(lnF_dm1, ln_K)]
        j_cap = _SERIES_MAX_TERMS if K_lin is math.inf else min(
            _SERIES_MAX_TERMS, int(round(K_lin))
        )
        best = terms[0]
        K_int = None if K_lin is math.inf else int(round(K_lin))
        for j in range(1, j_cap + 1):
            if j == K_int:
                ln_Kmj = NEG_INF  # exactly zero remaining competitors
            elif j * math.exp(-ln_K) < 1.0:
                ln_Kmj = ln_K + math.log1p(-j * math.exp(-ln_K))
            else:
                ln_Kmj = NEG_INF
            tail = _ln_pow_s(ln_s, ln_Kmj)
            term = _ln_binom_coeff(ln_K, j) + j * ln_t + tail + math.log(j / (j + 1.0))
            terms.append(term)
            if term > best:
                best = term
            elif term != NEG_INF and term < best - 745.0:
                # -inf terms (s = 0 at d = n) are skipped, not a stop signal
                break
        return min(0.0, _lse_array(np.array(terms)))
    # complement path: the error is bounded away from 0 here
    A = _ln_pow_one_minus(lnF_dm1, log_M)  # ln (1-u)^M = ln (t+s)^M
    if ln_s == NEG_INF:
        ln_D = math.inf  # D = ln((t+s)/s) with s = 0
    else:
        ratio = ln_t - ln_s  # D = log1p(t/s)
        if ratio < -37.0:
            ln_D = ratio
        elif ratio <= 30.0:
            ln_D = math.log(math.log1p(math.exp(ratio)))
        else:
            ln_D = math.log(ratio)
    ln_diff = A + _ln_one_minus_exp_neg(log_M + ln_D if ln_D != math.inf else math.inf)
    ln_C = ln_diff - log_M - ln_t
    return log1mexp(min(ln_C, 0.0))


def error_prob_given_distance(n: int, log_M: float, d: int, tie: TiePolicy) -> LogReal:
    """ln P{error | d_m = d} for M-1 iid Bin(n, 1/2) competitor distances."""
    if not 0 <= d <= n:
        raise ValueError(f"d={d} outside 0..{n}")
    if log_M < 0:
        raise ValueError("need M >= 1 (log_M >= 0)")
    tab = binomial_table(n)
    lnF_d = tab.log_cdf_half(d)
    if tie is TiePolicy.TIES_AS_ERROR:
        return LogReal(_ln_one_minus_pow(lnF_d, _ln_competitors(log_M)))
    lnF_dm1 = tab.log_cdf_half(d - 1) if d > 0 else NEG_INF
    ln_t = float(tab.log_choose[d]) - n * LN2
    return LogReal(_random_tie_error(lnF_d, lnF_dm1, ln_t, log_M))


@dataclass(frozen=True)
class OracleResult:
    n: int
    log_M: float
    p: float
    tie: TiePolicy
    log_Pe: LogReal
    per_distance: tuple  # ((d, ln contribution), ...) near the peak
    below_radius_mass: Optional[LogReal]  # None when the radius is undefined


def exact_error_probability(n: int, log_M: float, p: float, tie: TiePolicy) -> OracleResult:
    """Exact message- and ensemble-averaged minimum-distance error probability."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p={p} outside [0, 1/2]")
    if log_M < 0:
        raise ValueError("need M >= 1 (log_M >= 0)")
    tab = binomial_table(n)
    lc = tab.log_choose
    ds = np.arange(n + 1)
    if p == 0.0:
        ln_pmf = np.full(n + 1, NEG_INF)
        ln_pmf[0] = 0.0
    elif p == 0.5:
        ln_pmf = lc - n * LN2
    else:
        ln_pmf = lc + ds * math.log(p) + (n - ds) * math.log(1.0 - p)
    ln_K = _ln_competitors(log_M)
    lnF = np.array([tab.log_cdf_half(d) for d in range(n + 1)])
    ln_err = np.empty(n + 1)
    if tie is TiePolicy.TIES_AS_ERROR:
        for d in range(n + 1):
            ln_err[d] = _ln_one_minus_pow(lnF[d], ln_K)
    else:
        for d in range(n + 1):
            lnF_dm1 = lnF[d - 1] if d > 0 else NEG_INF
            ln_t = float(lc[d]) - n * LN2
            ln_err[d] = _random_tie_error(lnF[d], lnF_dm1, ln_t, log_M)
    terms = ln_pmf + ln_err
    log_pe = _lse_array(terms)
    if log_pe == NEG_INF:
        per_distance: tuple = ()
    else:
        keep = terms >= terms.max() - _PER_DISTANCE_WINDOW
        per_distance = tuple((int(d), float(terms[d])) for d in ds[keep])
    below = None
    if 0.0 < p < 0.5 and log_M > 0.0:
        z = p / (1.0 - p)
        if log_M < 40.0:
            r = finite_n_radius(n, z, round(math.exp(log_M))).r
        else:
            r = 0.5 - math.sqrt(math.log(n + 1) / n) + ln_K / (n * math.log(z))
        mask = ds < r * n
        below = LogReal(_lse_array(terms[mask]) if mask.any() else NEG_INF)
    return OracleResult(
        n=n,
        log_M=log_M,
        p=p,
        tie=tie,
        log_Pe=LogReal(min(0.0, log_pe)),
        per_distance=per_distance,
        below_radius_mass=below,
    )


class ExponentFit(NamedTuple):
    slope: float
    log_correction: float
    per_step_slopes: tuple
    intercept: float
    ln_pe: tuple


def fit_log_decay(n_grid: Sequence[int], ln_pe: Sequence[float]) -> ExponentFit:
    """Least-squares fit of -ln P_e(n) = E n + c ln n + a over the grid."""
    ns = np.asarray(n_grid, dtype=np.float64)
    if ns.size < 3 or np.any(np.diff(ns) <= 0):
        raise ValueError("n_grid must be strictly increasing with length >= 3")
    ys = -np.asarray(ln_pe, dtype=np.float64)
    A = np.column_stack([ns, np.log(ns), np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    steps = tuple(float(s) for s in np.diff(ys) / np.diff(ns))
    return ExponentFit(
        slope=float(coef[0]),
        log_correction=float(coef[1]),
        per_step_slopes=steps,
        intercept=float(coef[2]),
        ln_pe=tuple(float(v) for v in ln_pe),
    )


def exponent_fit(p: float, R: float, n_grid: Sequence[int], tie: TiePolicy) -> ExponentFit:
    """Fit the decay rate of the exact oracle with M = round(e^(Rn))."""
    ln_pe = [
        exact_error_probability(n, log_codebook_size(R, n), p, tie).log_Pe.value
        for n in n_grid
    ]
    return fit_log_decay(n_grid, ln_pe)
