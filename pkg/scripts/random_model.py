"""Random Euler product model: exact MGF against Monte Carlo and the Gaussian guess."""

import argparse

from zetalab.primes import sieve
from zetalab.random_model import ModelConfig, gaussian_mgf, mgf_monte_carlo, model_variance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", default="0.5,1,2")
    ap.add_argument("--x", default="1e2,1e3,1e4")
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--scheme", default="plain,smooth")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    xs = [float(v) for v in args.x.split(",")]
    table = sieve(max(xs) + 1)

    print(f"{'scheme':>7} {'k':>4} {'x':>8} {'exact':>12} {'monte carlo':>12} {'z':>6} {'gaussian':>12}")
    for scheme in args.scheme.split(","):
        for k in (float(v) for v in args.k.split(",")):
            for x in xs:
                cfg = ModelConfig(x=x, weight_scheme=scheme, k=k, n_samples=args.samples, seed=args.seed)
                res = mgf_monte_carlo(cfg, table)
                z = (res.monte_carlo - res.exact_product) / res.stderr if res.stderr else 0.0
                g = gaussian_mgf(model_variance(cfg, table), k)
                print(f"{scheme:>7} {k:4g} {x:8g} {res.exact_product:12.5f} {res.monte_carlo:12.5f} {z:6.2f} {g:12.5f}")


if __name__ == "__main__":
    main()
