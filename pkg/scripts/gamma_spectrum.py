"""Eigenvalues of the quadratic form behind the P-period return, with trace checks."""

import argparse

from momskew.filters import make_ema1, make_ema2
from momskew.linear import second_moment, third_moment_closed
from momskew.spectral import eigen_summary, gamma_matrix, trace_moments


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--P", type=int, default=20)
    ap.add_argument("--top", type=int, default=6)
    args = ap.parse_args()
    for name, f in [("EMA1(20)", make_ema1(20)), ("EMA2(20,40)", make_ema2(20, 40))]:
        g = gamma_matrix(f, args.P)
        _, m2, m3 = trace_moments(g)
        es = eigen_summary(g)
        ev = es.eigenvalues
        print(f"{name}: size {g.matrix.shape[0]}, rank {es.rank}, {es.n_pos} positive / {es.n_neg} negative")
        print(f"  largest  {', '.join(f'{v:.4f}' for v in ev[:args.top])}")
        print(f"  smallest {', '.join(f'{v:.4f}' for v in ev[::-1][:args.top])}")
        print(f"  mu2 trace {m2:.10g} closed {second_moment(f, args.P):.10g}")
        print(f"  mu3 trace {m3:.10g} closed {third_moment_closed(f, args.P):.10g}")


if __name__ == "__main__":
    main()
