"""Monte Carlo small-ball probabilities P(Y < eps) against the asymptote.

Reports the Monte Carlo estimate, its standard error, the asymptote
``c eps^(1/4 - nu/2) exp(-T^2 / (8 eps))``, and the log ratio
``log P / (-T^2 / (8 eps))`` that tends to 1 as eps -> 0.  Estimates based on
fewer than ``--min-hits`` samples are flagged.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from awbridge import normsq
from awbridge.bridge import BridgeParams


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.04, 0.03, 0.025, 0.02, 0.015])
    ap.add_argument("--draws", type=int, default=2_000_000)
    ap.add_argument("--terms", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-hits", type=int, default=100)
    args = ap.parse_args(argv)

    dist = normsq.NormSqDistribution.from_params(BridgeParams(args.alpha, args.T))
    y = normsq.sample_normsq(dist, args.draws, args.seed, n_terms=args.terms, add_tail_mean=True)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["eps", "hits", "p_mc", "se", "asymptote", "constant_known", "log_ratio",
                  "reliable"])
    for eps in args.eps:
        hits = int(np.count_nonzero(y < eps))
        p = hits / args.draws
        se = math.sqrt(p * (1.0 - p) / args.draws)
        asym, known = normsq.small_deviation(dist, eps)
        log_ratio = math.log(p) / (-args.T ** 2 / (8.0 * eps)) if hits else math.nan
        out.writerow([eps, hits, repr(p), repr(se), repr(asym), known, repr(log_ratio),
                      hits >= args.min_hits])


if __name__ == "__main__":
    main()
