#!/usr/bin/env python3
"""Fit the exact oracle's decay rate over a block-length grid and put it
next to every closed-form candidate, rate by rate.

Typical use:
    python3 scripts/slope_adjudication.py --p 0.1 --rates 0.02,0.05,0.1,0.2,0.3
"""

import argparse
import sys

from bsclab.exponents import (
    ChannelBSC,
    classical_exponent,
    printed_exponent,
    restricted_variational_exponent,
)
from bsclab.oracle import TiePolicy, exponent_fit


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--rates", type=str, default="0.02,0.05,0.1,0.2,0.3")
    ap.add_argument("--n-grid", type=str, default="512,1024,2048,4096,8192")
    ap.add_argument("--tie-policy", choices=["error", "random"], default="error")
    args = ap.parse_args()

    ch = ChannelBSC(args.p)
    grid = [int(t) for t in args.n_grid.split(",")]
    tie = TiePolicy.TIES_AS_ERROR if args.tie_policy == "error" else TiePolicy.RANDOM_TIE_BREAK

    header = ("R", "fit_slope", "log_corr", "branch1", "branch2", "branch3",
              "restricted", "classical")
    print(("{:>10} " * len(header)).format(*header))
    for tok in args.rates.split(","):
        R = float(tok)
        fit = exponent_fit(args.p, R, grid, tie)
        rep = printed_exponent(ch, R)
        _, restr = restricted_variational_exponent(ch, R)
        row = (R, fit.slope, fit.log_correction, rep.branch1, rep.branch2,
               rep.branch3, restr, classical_exponent(ch, R))
        print(("{:>10.6f} " * len(row)).format(*row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
