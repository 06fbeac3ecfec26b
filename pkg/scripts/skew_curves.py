"""Analytic skewness term structures for the standard filters and activations.

Writes one CSV per curve into --out and prints the peak of each.
"""

import argparse
from pathlib import Path

from momskew.filters import make_ema1, make_ema2
from momskew.linear import skew_term_structure
from momskew.nonlinear import DoubleStep, RevertingSigmoid, SimpleSigmoid, nonlinear_term_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/skew_curves")
    ap.add_argument("--Pmax", type=int, default=400)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    curves = {
        "ema1_20": skew_term_structure(make_ema1(20), args.Pmax),
        "ema2_20_40": skew_term_structure(make_ema2(20, 40), args.Pmax),
        "ema2eq_20": skew_term_structure(make_ema2(20, 20), args.Pmax),
    }
    slow = make_ema2(20, 40, normalized=True)
    for lam in (0.5, 1.0, 2.0):
        curves[f"sigmoid_{lam}"] = nonlinear_term_structure(slow, SimpleSigmoid(lam), args.Pmax)
    for lam in (0.75, 1.0, 1.5):
        curves[f"reverting_{lam}"] = nonlinear_term_structure(slow, RevertingSigmoid(lam), args.Pmax)
    for eps in (0.3, 0.6, 0.9):
        curves[f"double_step_{eps}"] = nonlinear_term_structure(slow, DoubleStep(eps), args.Pmax)

    for name, ts in curves.items():
        ts.write_csv(out / f"{name}.csv")
        P, k = ts.peak()
        print(f"{name:18s} peak kappa3 {k:7.4f} at P={P:4d}   kappa3(Pmax) {ts.kappa3[-1]:+.4f}")


if __name__ == "__main__":
    main()
