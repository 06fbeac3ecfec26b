"""Closed-form roots of real cubics (Cardano / trigonometric form)."""

from __future__ import annotations

import math


def _polish(c, x, iters=3):
    # Newton steps, kept only while they shrink the residual (a double
    # root has a derivative that is pure roundoff)
    c3, c2, c1, c0 = c
    val = lambda t: ((c3 * t + c2) * t + c1) * t + c0
    f = val(x)
    for _ in range(iters):
        d = (3 * c3 * x + 2 * c2) * x + c1
        if d == 0 or f == 0:
            break
        x_new = x - f / d
        f_new = val(x_new)
        if abs(f_new) >= abs(f):
            break
        x, f = x_new, f_new
    return x


def solve_cubic(c3: float, c2: float, c1: float, c0: float) -> list[complex]:
    """Roots of ``c3 x^3 + c2 x^2 + c1 x + c0``.

    Real roots come first, sorted ascending, returned as complex with zero
    imaginary part; a complex pair (if any) follows with positive imaginary
    part first.  Real roots are refined by Newton steps.
    """
    if c3 == 0:
        raise ZeroDivisionError("leading coefficient is zero")
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    p = c - b * b / 3
    q = 2 * b ** 3 / 27 - b * c / 3 + d
    shift = -b / 3
    disc = (q / 2) ** 2 + (p / 3) ** 3
    coeffs = (c3, c2, c1, c0)

    if disc > 0:
        sq = math.sqrt(disc)
        w = -q / 2 - math.copysign(sq, q) if q != 0 else sq
        u = math.copysign(abs(w) ** (1 / 3), w)
        v = -p / (3 * u) if u != 0 else 0.0
        real = _polish(coeffs, u + v + shift)
        re = -(u + v) / 2 + shift
        im = math.sqrt(3) / 2 * abs(u - v)
        return [complex(real), complex(re, im), complex(re, -im)]

    if p >= 0:
        # only reachable through roundoff at a triple root
        roots = [shift] * 3
    else:
        r = 2 * math.sqrt(-p / 3)
        arg = 3 * q / (p * r)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3
        roots = [r * math.cos(theta - 2 * math.pi * k / 3) + shift for k in range(3)]
    return [complex(_polish(coeffs, x)) for x in sorted(roots)]
