"""Closed-form rate/exponent quantities for random coding on the BSC.

All rates and exponents are in nats.  Two views of the low-rate exponent
are exposed side by side: the piecewise printed formula (printed_exponent)
and the variational program it was derived from
(restricted_variational_exponent / classical_exponent).  They disagree at
low rates; neither is silently "fixed" here -- the oracle module is the
instrument that adjudicates empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .logmath import LN2, bisect_monotone

__all__ = [
    "ChannelBSC",
    "RatePoint",
    "BranchReport",
    "binary_entropy",
    "capacity",
    "b0",
    "critical_rate",
    "new_critical_rate",
    "rate_r0",
    "delta_from_rate",
    "sphere_packing",
    "f1",
    "f2",
    "gallager_e0",
    "printed_exponent",
    "restricted_variational_exponent",
    "classical_exponent",
    "maximize_concave",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ChannelBSC:
    """BSC with crossover probability p in [0, 1/2] and derived constants."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"crossover probability {self.p} outside [0, 1/2]")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def z(self) -> float:
        return self.p / self.q

    @property
    def ln_z(self) -> float:
        return math.log(self.z) if self.p > 0 else float("-inf")


def binary_entropy(x: float) -> float:
    """Binary entropy in nats; h(0) = h(1) = 0, peak ln 2 at 1/2."""
    if isinstance(x, np.ndarray):
        if np.any((x < 0) | (x > 1)):
            raise ValueError("entropy argument outside [0, 1]")
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where((x > 0) & (x < 1), x, 0.5)
            h = -(t * np.log(t) + (1 - t) * np.log(1 - t))
        return np.where((x > 0) & (x < 1), h, 0.0)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log(x) + (1.0 - x) * math.log(1.0 - x))


def capacity(ch: ChannelBSC) -> float:
    return LN2 - binary_entropy(ch.p)


def b0(ch: ChannelBSC) -> float:
    sp, sq = math.sqrt(ch.p), math.sqrt(ch.q)
    return sp / (sq + sp)


def critical_rate(ch: ChannelBSC) -> float:
    return LN2 - binary_entropy(b0(ch))


def new_critical_rate(ch: ChannelBSC) -> float:
    """Low-rate threshold (sqrt(q)-sqrt(p))/(2(sqrt(q)+sqrt(p))) * ln(q/p).

    At p = 0 the expression is a 0-free +inf form; math.inf is returned as
    the distinguished unbounded marker.
    """
    if ch.p == 0.0:
        return math.inf
    sp, sq = math.sqrt(ch.p), math.sqrt(ch.q)
    return (sq - sp) / (2.0 * (sq + sp)) * math.log(ch.q / ch.p)


def rate_r0(ch: ChannelBSC, R: float) -> float:
    """Asymptotic minimal relative distance 1/2 + R/ln(p/q)."""
    if R == 0.0:
        return 0.5
    if ch.p == 0.5:
        return float("-inf")  # literal formula degenerates (ln z = 0)
    return 0.5 + R / ch.ln_z


def delta_from_rate(ch: ChannelBSC, R: float) -> float:
    """Solve ln 2 - h(delta) = R for delta in [p, 1/2]."""
    C = capacity(ch)
    if not -1e-12 <= R <= C + 1e-12:
        raise ValueError(f"rate {R} outside [0, {C}]")
    if R <= 0.0:
        return 0.5
    if R >= C:
        return ch.p
    # bisect to float collapse; downstream exponents are O(1) differences
    return bisect_monotone(binary_entropy, ch.p, 0.5, LN2 - R, tol=1e-300)


@dataclass(frozen=True)
class RatePoint:
    """A rate with its entropy parametrization and distance threshold."""

    R: float
    delta_R: float
    r0: float

    @classmethod
    def from_rate(cls, ch: ChannelBSC, R: float) -> "RatePoint":
        return cls(R=R, delta_R=delta_from_rate(ch, R), r0=rate_r0(ch, R))


def sphere_packing(ch: ChannelBSC, R: float) -> float:
    """delta ln(delta/p) + (1-delta) ln((1-delta)/q) at delta = delta_R."""
    d = delta_from_rate(ch, R)
    p, q = ch.p, ch.q
    if p == 0.0:
        return math.inf if d > 0 else 0.0
    return d * math.log(d / p) + (1.0 - d) * math.log((1.0 - d) / q)


def f1(ch: ChannelBSC, b: float) -> float:
    """ln q + h(b) + b ln z: per-symbol log-probability of distance bn."""
    if ch.p == 0.0 and b > 0:
        raise ValueError("f1 needs p > 0 when b > 0")
    tail = 0.0 if b == 0 else b * ch.ln_z
    return math.log(ch.q) + binary_entropy(b) + tail


def f2(ch: ChannelBSC, R: float, b: float) -> float:
    """f1(b) minus the union-bound bracket [ln 2 - R - h(b)]_+."""
    return f1(ch, b) - max(0.0, LN2 - R - binary_entropy(b))


def gallager_e0(ch: ChannelBSC) -> float:
    """E0 = ln 2 - 2 ln(sqrt(q) + sqrt(p))."""
    return LN2 - 2.0 * math.log(math.sqrt(ch.q) + math.sqrt(ch.p))


def maximize_concave(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    grid_step: float = 1e-3,
    bracket_tol: float = 1e-9,
) -> Tuple[float, float]:
    """Grid scan then golden-section refinement of a concave function.

    f must accept numpy arrays.  Returns (argmax, max).
    """
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return lo, float(f(np.array([lo]))[0])
    m = max(2, int(math.ceil((hi - lo) / grid_step)))
    xs = np.linspace(lo, hi, m + 1)
    vals = np.asarray(f(xs), dtype=np.float64)
    i = int(np.argmax(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, m)]
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = float(f(np.array([c]))[0])
    fd = float(f(np.array([d]))[0])
    while b - a > bracket_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = float(f(np.array([c]))[0])
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = float(f(np.array([d]))[0])
    x_star = 0.5 * (a + b)
    return float(x_star), float(f(np.array([x_star]))[0])


def _f2_vec(ch: ChannelBSC, R: float, bs: np.ndarray) -> np.ndarray:
    h = binary_entropy(bs)
    bracket = np.maximum(0.0, LN2 - R - h)
    return math.log(ch.q) + h + bs * ch.ln_z - bracket


def _max_f2_on(ch: ChannelBSC, R: float, lo: float, hi: float) -> Tuple[float, float]:
    """Maximize f2 over [lo, hi], splitting at the [.]_+ kinks b = delta_R
    and b = 1 - delta_R so each piece is concave."""
    delta = delta_from_rate(ch, R)
    knots = sorted({lo, hi} | {x for x in (delta, 1.0 - delta) if lo < x < hi})
    best = (lo, -math.inf)
    fvec = lambda bs: _f2_vec(ch, R, bs)
    for a, b in zip(knots[:-1], knots[1:]):
        x, v = maximize_concave(fvec, a, b)
        if v > best[1]:
            best = (x, v)
    return best


def restricted_variational_exponent(ch: ChannelBSC, R: float) -> Tuple[float, float]:
    """max of f2 over b >= r0 (clamped to [0, 1]); exponent is the negation."""
    if ch.p == 0.0:
        raise ValueError("variational exponent needs p > 0")
    lo = min(max(rate_r0(ch, R), 0.0), 1.0)
    b_star, val = _max_f2_on(ch, R, lo, 1.0)
    return b_star, -val


def classical_exponent(ch: ChannelBSC, R: float) -> float:
    """Unconstrained variant: -max over all b in [0, 1] of f2.

    Equals E0 - R below the critical rate and the sphere-packing exponent
    above it.
    """
    if ch.p == 0.0:
        raise ValueError("variational exponent needs p > 0")
    _, val = _max_f2_on(ch, R, 0.0, 1.0)
    return -val


@dataclass(frozen=True)
class BranchReport:
    """Literal evaluation of the three printed exponent branches."""

    branch1: float
    branch2: float
    branch3: float
    R_crit: float
    R_cr: float
    C: float
    selected: str  # "branch1" | "branch2" | "branch3" | "inconsistent-thresholds"


def printed_exponent(ch: ChannelBSC, R: float) -> BranchReport:
    """Evaluate all three printed branch formulas and pick by the printed
    ranges; when the two thresholds are out of order numerically, no branch
    is selected and the report is flagged."""
    C = capacity(ch)
    if not -1e-12 <= R <= C + 1e-12:
        raise ValueError(f"rate {R} outside [0, {C}]")
    r0 = rate_r0(ch, R)
    if 0.0 <= r0 <= 1.0:
        branch1 = 2.0 * R - LN2 + 2.0 * binary_entropy(r0) + math.log(
            math.sqrt(ch.p * ch.q)
        )
    else:
        branch1 = float("-inf")  # h(r0) undefined; formula taken literally
    branch2 = gallager_e0(ch) - R
    branch3 = sphere_packing(ch, R)
    R_crit = new_critical_rate(ch)
    R_cr = critical_rate(ch)
    if R_crit <= R_cr:
        if R <= R_crit:
            selected = "branch1"
        elif R <= R_cr:
            selected = "branch2"
        else:
            selected = "branch3"
    else:
        selected = "inconsistent-thresholds"
    return BranchReport(
        branch1=branch1,
        branch2=branch2,
        branch3=branch3,
        R_crit=R_crit,
        R_cr=R_cr,
        C=C,
        selected=selected,
    )
