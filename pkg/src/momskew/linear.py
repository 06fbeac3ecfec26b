"""Moments and skewness term structure of linear momentum strategies.

With i.i.d. risk-adjusted returns having first three moments (0, 1, 0), the
P-period trading return of a linear filter has

    mu2(P) = P R_0,
    mu3(P) = 6 sum_{k=1}^{P-1} (P - k) a_{k-1} R_k.

``third_moment_direct`` evaluates the sum term by term and serves as the
oracle for ``third_moment_closed``, which telescopes the geometric series
over pole pairs and costs O(poles^2) regardless of P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cubic import solve_cubic
from .errors import NumericalError
from .filters import (
    LinearFilter,
    autocovariance,
    combine,
    make_ema2,
    require_sprz,
    system_value,
    value_at_origin,
    weight,
    _alpha,
)
from .termstructure import MomentTermStructure


def second_moment(f: LinearFilter, P):
    """``P * R_0``."""
    r0 = autocovariance(f, 0)
    return r0 * P if np.isscalar(P) else np.asarray(P) * r0


def third_moment_direct(f: LinearFilter, P: int) -> float:
    """Third moment by direct O(P) summation with exact autocovariances."""
    if P < 1:
        raise ValueError("P must be >= 1")
    if P == 1:
        return 0.0
    k = np.arange(1, P)
    return float(6.0 * np.sum((P - k) * weight(f, k - 1) * autocovariance(f, k)))


def _pole_terms(f: LinearFilter):
    """Poles, gain-scaled residues and ``A(1/alpha_j)`` as numpy arrays."""
    alpha = np.array(f.poles, dtype=complex)
    rho = f.gain * np.array(f.residues, dtype=complex)
    B = np.array([system_value(f, 1 / a) for a in alpha], dtype=complex)
    return alpha, rho, B


def _coalesced_constants(f: LinearFilter):
    a = f.coalesced
    x = a * a
    C = (1 + x) / (1 - x) ** 3
    D = 1 / (1 - x) ** 2
    return a, x, C, D, f.gain ** 3


def _third_moment_coalesced(f: LinearFilter, P):
    # sum_{k<P} (P-k) k^m x^k for m = 1, 2 in closed form
    a, x, C, D, g3 = _coalesced_constants(f)
    P = np.asarray(P, dtype=float)
    xP = x ** P
    G1 = x * (P * x * xP + P * x - P * xP - P - x * xP + x - xP + 1) / (x - 1) ** 3
    G2 = x * (P ** 2 * x ** 2 * xP - 2 * P ** 2 * x * xP + P ** 2 * xP
              - 2 * P * x ** 2 * xP - P * x ** 2 + 2 * P * xP + P
              + x ** 2 * xP - x ** 2 + 4 * x * xP - 4 * x + xP - 1) / (x - 1) ** 4
    return 6 * g3 / a * (C * G1 + D * G2)


def third_moment_closed(f: LinearFilter, P):
    """Third moment from the pole-residue expansion.

    For simple poles ``alpha_j`` with residues ``rho_j`` and ``B_j = A(1/alpha_j)``:

        mu3 = 6 P sum_j rho_j B_j^2 - 6 A(0) sum_j rho_j B_j
              - 6 sum_{j,k} rho_j rho_k B_k / alpha_j
                    * (1 - (alpha_j alpha_k)^P) / (1 - alpha_j alpha_k)^2

    ``P`` may be an integer or an integer array.  ``mu3(1)`` is returned as an
    exact zero.
    """
    require_sprz(f)
    P_arr = np.atleast_1d(np.asarray(P, dtype=np.int64))
    if np.any(P_arr < 1):
        raise ValueError("P must be >= 1")
    if f.coalesced is not None:
        out = _third_moment_coalesced(f, P_arr)
    elif not f.poles:
        out = np.zeros(P_arr.shape)
    else:
        alpha, rho, B = _pole_terms(f)
        lead = np.sum(rho * B * B)
        mid = value_at_origin(f) * np.sum(rho * B)
        r = alpha[:, None] * alpha[None, :]
        coef = rho[:, None] * rho[None, :] * B[None, :] / alpha[:, None] / (1 - r) ** 2
        rP = r[None, :, :] ** P_arr[:, None, None].astype(float)
        tail = np.sum(coef[None] * (1 - rP), axis=(1, 2))
        out = (6 * P_arr * lead - 6 * mid - 6 * tail).real
    out = np.where(P_arr == 1, 0.0, out)
    return float(out[0]) if np.ndim(P) == 0 else out


def asymptotic_third_moment_rate(f: LinearFilter) -> float:
    """``sum_{k>=1} a_{k-1} R_k``, so that ``mu3(P) ~ 6 P`` times this."""
    require_sprz(f)
    if f.coalesced is not None:
        a, x, C, D, g3 = _coalesced_constants(f)
        return g3 / a * (C * x / (1 - x) ** 2 + D * x * (1 + x) / (1 - x) ** 3)
    if not f.poles:
        return 0.0
    alpha, rho, B = _pole_terms(f)
    return float(np.sum(rho * B * B).real)


def lag0_autocovariance_residue(f: LinearFilter) -> float:
    """``R_0`` by residues: ``A(0) a_0 + sum_j rho_j A(1/alpha_j) / alpha_j``."""
    require_sprz(f)
    if f.coalesced is not None:
        return autocovariance(f, 0)
    a0 = f.gain * f.a0
    if not f.poles:
        return a0 * a0
    alpha, rho, B = _pole_terms(f)
    return float((value_at_origin(f) * a0 + np.sum(rho * B / alpha)).real)


def asymptotic_skew_coefficient(f: LinearFilter) -> float:
    """``c`` such that ``kappa3(P) ~ c / sqrt(P)`` for large P."""
    r0 = lag0_autocovariance_residue(f)
    return 6 * asymptotic_third_moment_rate(f) / r0 ** 1.5


def ema1_skew_exact(N: float, P):
    """Exact skewness of EMA1 P-period trading returns."""
    if not N > 1:
        raise ValueError("N must exceed 1")
    a = 1 - 1 / N
    P = np.asarray(P, dtype=float)
    out = 6 * a / (math.sqrt(1 - a * a) * np.sqrt(P)) * (
        1 - (1 - a ** (2 * P)) / ((1 - a * a) * P))
    return float(out) if out.ndim == 0 else out


def ema1_skew_continuum(x):
    """Large-N shape of the EMA1 skewness in ``x = P / N``."""
    x = np.asarray(x, dtype=float)
    return 3 / np.sqrt(2 * x ** 3) * (np.exp(-2 * x) - 1 + 2 * x)


def ema2_moments_exact(N_alpha: float, N_beta: float, P):
    """Exact ``(mu2, mu3)`` for the unnormalized EMA2 filter.

    Equal periods fall back to the coalesced closed form.
    """
    a, b = _alpha(N_alpha), _alpha(N_beta)
    if a == b:
        f = make_ema2(N_alpha, N_beta)
        return second_moment(f, P), third_moment_closed(f, P)
    P = np.asarray(P, dtype=float)
    ab = a * b
    mu2 = P * (1 + ab) / ((1 - ab) * (1 - a * a) * (1 - b * b))
    d2 = (a - b) ** 2
    mu3 = (6 * P * (a + b) * (1 + ab) / ((1 - ab) * (1 - a * a) ** 2 * (1 - b * b) ** 2)
           - 6 * a ** 3 * (1 - a ** (2 * P)) / (d2 * (1 - a * a) ** 3 * (1 - ab))
           - 6 * b ** 3 * (1 - b ** (2 * P)) / (d2 * (1 - b * b) ** 3 * (1 - ab))
           + 6 * a * b * b * (1 - ab ** P) / (d2 * (1 - b * b) * (1 - ab) ** 3)
           + 6 * a * a * b * (1 - ab ** P) / (d2 * (1 - a * a) * (1 - ab) ** 3))
    mu3 = np.where(P == 1, 0.0, mu3)
    if mu2.ndim == 0:
        return float(mu2), float(mu3)
    return mu2, mu3


def skew_term_structure(f: LinearFilter, Pmax: int) -> MomentTermStructure:
    """Closed-form ``mu2, mu3, kappa3`` for ``P = 1 .. Pmax``."""
    if Pmax < 1:
        raise ValueError("Pmax must be >= 1")
    P = np.arange(1, Pmax + 1)
    return MomentTermStructure.from_moments(
        P, second_moment(f, P), third_moment_closed(f, P))


# ---------------------------------------------------------------------------
# hybrid fast/slow models


@dataclass(frozen=True)
class HybridConstraint:
    """Factorization of the asymptotic-skew cubic in ``(lam_F, lam_S)``.

    ``P(lam_F, lam_S) = c3 * prod_i (lam_F - zeta_i lam_S)``.  When exactly one
    root is real, positivity reduces to ``sign * (lam_F - zeta_real lam_S) > 0``
    and ``inequality`` holds ``(sign, -sign * zeta_real)``, the coefficients of
    ``lam_F`` and ``lam_S``.  With three real roots ``inequality`` is None.
    """

    coefficients: tuple[float, float, float, float]
    roots: tuple[complex, ...]
    zeta_real: float | None
    zeta_complex: tuple[complex, complex] | None
    inequality: tuple[float, float] | None

    def describe(self) -> str:
        if self.inequality is None:
            rs = ", ".join(f"{r.real:.6g}" for r in self.roots)
            return f"three real roots ({rs}); no single linear constraint"
        cf, cs = self.inequality
        sign = "+" if cs >= 0 else "-"
        return f"{cf:g}*lamF {sign} {abs(cs):.4f}*lamS > 0"

    def satisfied(self, lam_F: float, lam_S: float) -> bool:
        if self.inequality is None:
            raise ValueError("no single linear constraint available")
        cf, cs = self.inequality
        return cf * lam_F + cs * lam_S > 0


def _hybrid_filter(lam_F, lam_S, fast, slow):
    return combine([fast, slow], [lam_F, lam_S])


def hybrid_cubic(lam_F: float, lam_S: float, fast: LinearFilter, slow: LinearFilter) -> float:
    """``sum_j rho_j A(1/alpha_j)^2`` of ``lam_F * fast + lam_S * slow``."""
    f = _hybrid_filter(lam_F, lam_S, fast, slow)
    require_sprz(f, allow_coalesced=False)
    return asymptotic_third_moment_rate(f)


def hybrid_roots(fast: LinearFilter, slow: LinearFilter) -> HybridConstraint:
    """Roots ``zeta_i`` of the homogeneous cubic and the positivity constraint."""
    Pv = lambda lf, ls: hybrid_cubic(lf, ls, fast, slow)
    c3 = Pv(1.0, 0.0)
    c0 = Pv(0.0, 1.0)
    s = Pv(1.0, 1.0) - c3 - c0
    d = Pv(1.0, -1.0) - c3 + c0
    c1 = (s + d) / 2
    c2 = (s - d) / 2
    scale = max(abs(c3), abs(c2), abs(c1), abs(c0))
    if scale == 0 or abs(c3) < 1e-12 * scale:
        raise NumericalError(
            f"degenerate hybrid cubic: leading coefficient {c3!r} vs scale {scale!r}")
    roots = tuple(solve_cubic(c3, c2, c1, c0))
    real = [r for r in roots if r.imag == 0]
    if len(real) == 1:
        z = real[0].real
        sign = 1.0 if c3 > 0 else -1.0
        return HybridConstraint((c3, c2, c1, c0), roots, z,
                                (roots[1], roots[2]), (sign, -sign * z))
    return HybridConstraint((c3, c2, c1, c0), roots, None, None, None)
