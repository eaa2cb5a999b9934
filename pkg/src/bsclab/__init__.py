"""Verification laboratory for the exact random-coding error exponent of
the binary symmetric channel.

Layers, from trusted to empirical:
    logmath    log-domain scalars, binomial tables, bisection
    exponents  closed-form rates and exponent formulas
    oracle     exact ensemble-average error probability (no sampling)
    simulator  Monte Carlo with real codebooks and bit-level decoding
    statsum    concentration study of the statistical sum
    cli        sweeps, reports, and the cross-check battery
"""

__version__ = "0.1.0"
