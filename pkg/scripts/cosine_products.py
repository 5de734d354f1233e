"""Mean values of products of cos(t log p) against their closed-form main terms."""

import argparse
import itertools

from zetalab.kernel import FactoredInteger, cos_product_main_term, cos_product_quadrature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--support", default="2,3,5,7")
    ap.add_argument("--max-weight", type=int, default=6)
    ap.add_argument("--T", type=float, default=1e5)
    args = ap.parse_args()
    support = [int(p) for p in args.support.split(",")]

    worst = 0.0
    print(f"{'n':>10} {'main term':>14} {'quadrature':>14} {'|error|/n':>10}")
    for alphas in itertools.product(range(args.max_weight + 1), repeat=len(support)):
        if sum(alphas) > args.max_weight:
            continue
        n = FactoredInteger(tuple((p, a) for p, a in zip(support, alphas) if a))
        main_term = cos_product_main_term(n, args.T)
        quad = cos_product_quadrature(n, args.T)
        err = abs(quad - main_term) / n.value
        worst = max(worst, err)
        print(f"{n.value:10d} {main_term:14.4f} {quad:14.4f} {err:10.4f}")
    print(f"worst |error|/n: {worst:.4f}")


if __name__ == "__main__":
    main()
