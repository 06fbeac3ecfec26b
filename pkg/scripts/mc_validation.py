"""Monte Carlo skew vs analytic skew, with bootstrap standard errors."""

import argparse

from momskew.filters import make_ema1, make_ema2
from momskew.linear import skew_term_structure
from momskew.nonlinear import DoubleStep, Linear, SimpleSigmoid, nonlinear_term_structure
from momskew.simulate import SimConfig, simulate_term_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--days", type=int, default=1000, help="days per path after burn-in")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--distribution", default="gaussian")
    args = ap.parse_args()
    periods = (10, 50, 100, 200)
    ema1, ema2 = make_ema1(20, normalized=True), make_ema2(20, 40, normalized=True)
    cases = [("EMA1(20)", ema1, Linear(), 400), ("EMA2(20,40)", ema2, Linear(), 800),
             ("sigmoid(1)", ema2, SimpleSigmoid(1.0), 800),
             ("double-step(0.6)", ema2, DoubleStep(0.6), 800)]
    print(f"{'case':18s} {'P':>4s} {'analytic':>9s} {'mc':>9s} {'se':>7s} {'z':>6s}")
    for name, f, spec, burn in cases:
        analytic = (skew_term_structure(f, max(periods)) if isinstance(spec, Linear)
                    else nonlinear_term_structure(f, spec, max(periods)))
        cfg = SimConfig(seed=args.seed, n_paths=args.paths, horizon=args.days + burn, burn_in=burn,
                        distribution=args.distribution, periods=periods, workers=args.workers)
        mc = simulate_term_structure(cfg, f, spec)
        for P in periods:
            a, m, se = analytic.at(P), mc.at(P), mc.se_at(P)
            print(f"{name:18s} {P:4d} {a:9.4f} {m:9.4f} {se:7.4f} {(m - a) / se:+6.2f}")
        for flag in mc.flags:
            print(f"  note: {flag}")


if __name__ == "__main__":
    main()
