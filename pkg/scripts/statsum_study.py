#!/usr/bin/env python3
"""Concentration study of the statistical sum: measured deviation quantiles
against the stated threshold, plus the analytic typical-value predictor.

Typical use:
    python3 scripts/statsum_study.py --p 0.1 --rate 0.1 --n-list 40,80,160,320
"""

import argparse
import math
import statistics
import sys

from bsclab.exponents import ChannelBSC
from bsclab.statsum import sample_statsum, theorem2_check, typical_log_statsum


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--rate", type=float, default=0.1)
    ap.add_argument("--n-list", type=str, default="40,80,160,320")
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ch = ChannelBSC(args.p)
    per_symbol, b_star = typical_log_statsum(ch.z, args.rate)
    print(f"z = {ch.z:.6f}, predictor: per-symbol ln S = {per_symbol:.4f} "
          f"at b* = {b_star:.4f}")
    print(f"{'n':>5} {'M':>9} {'median/n':>9} {'center/n':>9} {'threshold':>10} "
          f"{'median dev':>10} {'viol freq':>9}")
    for tok in args.n_list.split(","):
        n = int(tok)
        chk = theorem2_check(ch.z, args.rate, n, args.samples, args.seed)
        draws = sample_statsum(ch.z, chk.M, n, args.samples, args.seed)
        med = statistics.median(s.ln_S for s in draws)
        center = draws[0].log_M + 0.5 * n * math.log(ch.z)
        med_dev = statistics.median(s.deviation for s in draws)
        print(f"{n:>5} {chk.M:>9} {med / n:>9.4f} {center / n:>9.4f} "
              f"{chk.threshold:>10.2f} {med_dev:>10.2f} "
              f"{chk.violation_frequency:>9.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
