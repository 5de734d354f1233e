"""Monte Carlo split of the moment over the T / S(j) partition of [T, 2T]."""

import argparse
import math

from zetalab.kernel import empirical_split_moment, product_moment_bound
from zetalab.polys import ScheduleOverrides, beta_schedule
from zetalab.primes import sieve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=float, default=2.0)
    ap.add_argument("--T", type=float, default=1e4)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--ratio", type=float, default=20.0)
    ap.add_argument("--threshold", type=float, default=0.5)
    ap.add_argument("--base", type=float, default=0.08)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sched = beta_schedule(args.k, args.T, ScheduleOverrides(ratio=args.ratio, threshold=args.threshold, base=args.base))
    table = sieve(math.ceil(max(sched.cutoff(sched.cap_index), 100)) + 1)
    print("exponents:", [round(sched.beta(i), 4) for i in range(sched.cap_index + 1)])
    rep = empirical_split_moment(args.k, args.T, sched, args.samples, table, args.seed)

    print(f"{'class':>6} {'count':>7} {'measure':>8} {'contribution':>14} {'stderr':>12} {'surrogate':>14}")
    for c in rep.classes:
        print(f"{c.name:>6} {c.count:7d} {c.measure_fraction:8.4f} {c.contribution:14.6e} {c.stderr:12.4e} {c.surrogate:14.6e}")
    print(f"{'total':>6} {rep.samples:7d} {1:8.4f} {rep.total:14.6e} {rep.total_stderr:12.4e}")
    if sched.cap_index >= 1:
        bound = product_moment_bound(args.k, sched, table, args.T)
        print(f"polynomial moment bound on the T class: {bound:.6e}")
    print(f"T log^(k^2) T = {args.T * math.log(args.T) ** (args.k**2):.6e}")


if __name__ == "__main__":
    main()
