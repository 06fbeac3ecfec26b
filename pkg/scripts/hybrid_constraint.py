"""Positivity constraint on fast/slow crossover multipliers for several period sets."""

import argparse

from momskew.filters import make_crossover
from momskew.linear import hybrid_roots

DEFAULT_SETS = ["5,10,20,40", "2,4,10,20", "10,20,40,80", "5,20,50,200"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("sets", nargs="*", default=DEFAULT_SETS,
                    help="comma-separated fast_a,fast_b,slow_a,slow_b")
    args = ap.parse_args()
    for s in args.sets:
        a, b, c, d = (float(x) for x in s.split(","))
        h = hybrid_roots(make_crossover(a, b), make_crossover(c, d))
        roots = ", ".join(f"{r.real:+.4f}{r.imag:+.4f}j" for r in h.roots)
        print(f"{s:>14s}: {h.describe():32s} roots [{roots}]")


if __name__ == "__main__":
    main()
