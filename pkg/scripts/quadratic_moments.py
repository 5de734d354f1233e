"""Moments of L(1/2, chi_d) over fundamental discriminants X <= |d| < 2X."""

import argparse
import math

from zetalab.quadratic import LValueCache, quadratic_moment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--X", default="100,300,1000,3000")
    ap.add_argument("--k", default="0.5,1,2")
    ap.add_argument("--cache", default=None, help="CSV file for reusing L-values between runs")
    args = ap.parse_args()
    cache = LValueCache(args.cache)

    print(f"{'X':>6} {'k':>4} {'count':>6} {'total':>14} {'/ X log^(k(k+1)/2) X':>22} {'share in Q':>11}")
    for X in (float(v) for v in args.X.split(",")):
        for k in (float(v) for v in args.k.split(",")):
            rep = quadratic_moment(k, X, cache=cache)
            norm = X * math.log(X) ** (k * (k + 1) / 2)
            share = rep.count_in_q / rep.count
            print(f"{X:6g} {k:4g} {rep.count:6d} {rep.total:14.6e} {rep.total / norm:22.5f} {share:11.3f}")


if __name__ == "__main__":
    main()
