"""Tabulate P(Y > x) from the series against the large-deviation asymptote.

Writes CSV with columns alpha, x, survival, error_estimate, asymptote, ratio.
The ratio should drift toward 1 as x grows.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from awbridge import normsq
from awbridge.bridge import BridgeParams


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.3, 0.5, 1.0, 2.0])
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--xs", type=float, nargs="+", default=list(np.linspace(0.25, 6.0, 24)))
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["alpha", "x", "survival", "error_estimate", "asymptote", "ratio"])
    for alpha in args.alphas:
        dist = normsq.NormSqDistribution.from_params(BridgeParams(alpha, args.T))
        for x in args.xs:
            res = normsq.survival(dist, x)
            asym = normsq.large_deviation_tail(dist, x)
            out.writerow([alpha, repr(float(x)), repr(res.value), repr(res.error_estimate),
                          repr(asym), repr(res.value / asym)])


if __name__ == "__main__":
    main()
