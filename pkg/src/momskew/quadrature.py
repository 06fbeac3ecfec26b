"""Gaussian expectations by node-doubling quadrature.

Smooth integrands use probabilists' Gauss-Hermite rules, falling back to
panels split at 0 and +-1 when a steep integrand does not settle.  Integrands with
jumps (e.g. step activations) use composite Gauss-Legendre panels split at the
discontinuities, which keeps every panel smooth and restores fast convergence.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureError

GH_LEVELS = (32, 64, 128, 256)
GL_LEVELS = (16, 32, 64, 128)
TRUNCATION = 10.0  # standard deviations; mass beyond is below 1e-22


@lru_cache(maxsize=None)
def _gh(n: int):
    x, w = hermegauss(n)
    return x, w / w.sum()


@lru_cache(maxsize=None)
def _gl(n: int):
    return leggauss(n)


def _panels(breakpoints: Sequence[float], n: int, half_width: float = TRUNCATION):
    edges = sorted({-half_width, half_width,
                    *(float(b) for b in breakpoints if -half_width < b < half_width)})
    t, w = _gl(n)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _converge(levels, evaluate, tol, what):
    prev = change = None
    for n in levels:
        val = evaluate(n)
        if prev is not None:
            change = abs(val - prev)
            if change < tol:
                return val
        prev = val
    raise QuadratureError(
        f"{what} did not converge to {tol:g} under node doubling "
        f"(last change {change:.3g} at n={levels[-1]})")


# Split points used when Gauss-Hermite fails on a smooth but steep integrand
FALLBACK_BREAKS = (-1.0, 0.0, 1.0)


def normal_expectation(g: Callable[[np.ndarray], np.ndarray],
                       breakpoints: Sequence[float] = (),
                       tol: float = 1e-10) -> float:
    """``E[g(Z)]`` for ``Z ~ N(0, 1)``."""
    def panel(n, breaks=tuple(breakpoints)):
        x, w = _panels(breaks, n)
        return float(np.sum(w * g(x) * np.exp(-0.5 * x * x)) / np.sqrt(2 * np.pi))

    if breakpoints:
        return _converge(GL_LEVELS, panel, tol, "normal expectation")

    def hermite(n):
        x, w = _gh(n)
        return float(np.sum(w * g(x)))
    try:
        return _converge(GH_LEVELS, hermite, tol, "normal expectation")
    except QuadratureError:
        return _converge(GL_LEVELS, lambda n: panel(n, FALLBACK_BREAKS), tol,
                         "normal expectation")


def bivariate_expectation(func: Callable[[np.ndarray, np.ndarray], np.ndarray],
                          rho: float,
                          breakpoints: Sequence[float] = (),
                          tol: float = 1e-10) -> float:
    """``E[func(Z1, Z2)]`` with unit-variance normals of correlation ``rho``.

    Without breakpoints ``Z2 = rho Z1 + sqrt(1 - rho^2) W`` on a tensor
    Gauss-Hermite grid.  With breakpoints the integrand is taken to jump only
    along the lines ``z1 = b`` and ``z2 = b``, and a tensor panel rule on the
    bivariate density is used.
    """
    if not -1 < rho < 1:
        raise ValueError("correlation must lie strictly inside (-1, 1)")
    s = np.sqrt(1 - rho * rho)

    def panel(n, breaks=tuple(breakpoints)):
        x, w = _panels(breaks, n)
        z1, z2 = x[:, None], x[None, :]
        q = (z1 * z1 - 2 * rho * z1 * z2 + z2 * z2) / (2 * s * s)
        dens = np.exp(-q) / (2 * np.pi * s)
        return float(np.sum(w[:, None] * w[None, :] * dens * func(z1, z2)))

    if breakpoints:
        return _converge(GL_LEVELS, panel, tol, "bivariate expectation")

    def hermite(n):
        x, w = _gh(n)
        z1 = x[:, None]
        z2 = rho * z1 + s * x[None, :]
        return float(np.sum(w[:, None] * w[None, :] * func(z1, z2)))
    try:
        return _converge(GH_LEVELS, hermite, tol, "bivariate expectation")
    except QuadratureError:
        return _converge(GL_LEVELS, lambda n: panel(n, FALLBACK_BREAKS), tol,
                         "bivariate expectation")
