"""Growth of the 2k-th moment of zeta on the critical line.

Integrates |zeta(1/2+it)|^(2k) over [t0, 2 t0] for a few t0, divides by the
interval length and fits the exponent of log t0.  The fit should land near k^2.
"""

import argparse
import math

import numpy as np

from zetalab.zeta import moment_quadrature_multi, second_moment_main_term


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", default="1,2")
    ap.add_argument("--t0", default="1e3,1e4,1e5", help="comma-separated left endpoints")
    args = ap.parse_args()
    ks = [float(v) for v in args.k.split(",")]
    t0s = [float(v) for v in args.t0.split(",")]

    logs = {k: [] for k in ks}
    print(f"{'t0':>10} {'k':>4} {'moment':>14} {'mean':>12} {'nodes':>8}")
    for t0 in t0s:
        for est in moment_quadrature_multi(ks, t0, 2 * t0):
            mean = est.value / t0
            logs[est.k].append(math.log(mean))
            print(f"{t0:10.0f} {est.k:4g} {est.value:14.6e} {mean:12.4f} {est.nodes:8d}")
        if 1.0 in ks:
            print(f"{'':10} main term for k=1: {second_moment_main_term(t0, 2 * t0):.6e}")

    if len(t0s) > 1:
        x = np.log(np.log(t0s))
        for k in ks:
            slope = np.polyfit(x, logs[k], 1)[0]
            print(f"k={k:g}: fitted exponent of log t {slope:.3f} (k^2 = {k * k:g})")


if __name__ == "__main__":
    main()
