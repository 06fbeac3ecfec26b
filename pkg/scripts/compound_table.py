"""Analytic skew at P=100 for compound sigmoids over a (lambda, w_R/w_S) grid.

Monotonicity in lambda and in the ratio is reported, not asserted.
"""

import argparse
import math

import numpy as np

from momskew.filters import make_ema2
from momskew.nonlinear import compound_sigmoid_make, nonlinear_term_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--P", type=int, default=100)
    ap.add_argument("--lambdas", default="0.25,0.5,0.75,1.0,1.5")
    ap.add_argument("--ratios", default="0,0.5,1,2,inf")
    args = ap.parse_args()
    lams = [float(x) for x in args.lambdas.split(",")]
    ratios = [float(x) for x in args.ratios.split(",")]
    f = make_ema2(20, 40, normalized=True)

    table = np.array([[nonlinear_term_structure(f, compound_sigmoid_make(r, l), args.P).at(args.P)
                       for l in lams] for r in ratios])
    print("ratio \\ lambda " + "".join(f"{l:>9.2f}" for l in lams))
    for r, row in zip(ratios, table):
        label = "inf" if math.isinf(r) else f"{r:g}"
        print(f"{label:>15s} " + "".join(f"{v:9.4f}" for v in row))

    bad_l = [(ratios[i], lams[j]) for i in range(len(ratios)) for j in range(len(lams) - 1)
             if table[i, j + 1] >= table[i, j]]
    bad_r = [(ratios[i], lams[j]) for i in range(len(ratios) - 1) for j in range(len(lams))
             if table[i + 1, j] >= table[i, j]]
    print(f"non-decreasing steps in lambda: {bad_l or 'none'}")
    print(f"non-decreasing steps in ratio: {bad_r or 'none'}")


if __name__ == "__main__":
    main()
