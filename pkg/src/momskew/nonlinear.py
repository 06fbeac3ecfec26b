"""Nonlinear momentum strategies: activation functions and skewness.

The position is ``psi(V_n)`` where ``V_n`` is a unit-variance momentum factor
and ``psi`` is normalized so that ``E[psi(Z)^2] = 1``.  The P-period third
moment is ``3 sum_{k<P} (P - k) H_k`` with

    H_k = 2 a_{k-1} E[psi(Z1)^2 psi(Z2) (Z1 - rho Z2) / (2 (1 - rho^2))],

``(Z1, Z2)`` standard bivariate normal with correlation ``rho = R_k``.
Closed forms for ``H_k`` exist for the simple sigmoid, reverting sigmoid and
double step; everything else goes through quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .cubic import solve_cubic
from .errors import ConfigError, QuadratureError
from .filters import LinearFilter, autocovariance, weight
from .quadrature import bivariate_expectation, normal_expectation
from .termstructure import MomentTermStructure

_SQRT_2PI = math.sqrt(2 * math.pi)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


# ---------------------------------------------------------------------------
# activation functions


class Activation:
    """Base class; subclasses define ``raw`` and the normalization ``c``."""

    name = "activation"
    breakpoints: tuple[float, ...] = ()
    has_closed_form = False

    @property
    def c(self) -> float:
        return 1.0

    def raw(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.c * self.raw(np.asarray(z, dtype=float))

    def h_closed(self, a_prev, rho):
        raise NotImplementedError(f"{self.name} has no closed-form H_k; use quadrature")

    def to_config(self) -> dict:
        return {"type": self.name}


ActivationSpec = Activation


@dataclass(frozen=True)
class Linear(Activation):
    name = "linear"
    has_closed_form = True

    def raw(self, z):
        return z

    def h_closed(self, a_prev, rho):
        return 2 * np.asarray(a_prev) * np.asarray(rho)


@dataclass(frozen=True)
class SimpleSigmoid(Activation):
    """``c (2 Phi(lam z) - 1)``: caps the position for large momentum."""

    lam: float
    name = "sigmoid"
    has_closed_form = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("sigmoid lambda must be positive")

    @property
    def c(self):
        l2 = self.lam ** 2
        return (2 / math.pi * math.atan(l2 / math.sqrt(1 + 2 * l2))) ** -0.5

    def raw(self, z):
        return 2 * ndtr(self.lam * z) - 1

    def h_closed(self, a_prev, rho):
        lam = self.lam
        l2 = lam * lam
        rho = np.asarray(rho, dtype=float)
        arg = (l2 * rho / math.sqrt(1 + l2)) / np.sqrt(1 + 3 * l2 + 2 * (1 - rho ** 2) * l2 * l2)
        return (2 * np.asarray(a_prev) * self.c ** 3 * (2 / math.pi) ** 1.5
                * lam / math.sqrt(1 + l2) * np.arctan(arg))

    def to_config(self):
        return {"type": self.name, "lambda": self.lam}


@dataclass(frozen=True)
class RevertingSigmoid(Activation):
    """``c z exp(-lam^2 z^2 / 2)``: cuts the position back for strong trends."""

    lam: float
    name = "reverting"
    has_closed_form = True

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigError("reverting sigmoid lambda must be nonnegative")

    @property
    def c(self):
        return (1 + 2 * self.lam ** 2) ** 0.75

    def raw(self, z):
        return z * np.exp(-0.5 * self.lam ** 2 * z * z)

    def h_closed(self, a_prev, rho):
        l2 = self.lam ** 2
        rho = np.asarray(rho, dtype=float)
        w = 1 - rho ** 2
        return (2 * np.asarray(a_prev) * self.c ** 3 * rho * (1 - w * l2 * l2)
                / (1 + 3 * l2 + 2 * w * l2 * l2) ** 2.5)

    def to_config(self):
        return {"type": self.name, "lambda": self.lam}


@dataclass(frozen=True)
class DoubleStep(Activation):
    """``c (1{z > eps} - 1{z < -eps})``: binary bet with a dead zone."""

    eps: float
    name = "double_step"
    has_closed_form = True

    def __post_init__(self):
        if not self.eps >= 0:
            raise ConfigError("double-step epsilon must be nonnegative")

    @property
    def breakpoints(self):
        return (-self.eps, self.eps) if self.eps > 0 else (0.0,)

    @property
    def c(self):
        return (2 * ndtr(-self.eps)) ** -0.5

    def raw(self, z):
        return (z > self.eps).astype(float) - (z < -self.eps)

    def h_closed(self, a_prev, rho):
        e = self.eps
        rho = np.asarray(rho, dtype=float)
        up = e * np.sqrt((1 + rho) / (1 - rho))
        dn = e * np.sqrt((1 - rho) / (1 + rho))
        return 2 * np.asarray(a_prev) * self.c ** 3 * _phi(e) * (ndtr(up) - ndtr(dn))

    def to_config(self):
        return {"type": self.name, "epsilon": self.eps}


def cos_delta(lam: float) -> float:
    """Correlation of the normalized simple and reverting sigmoids."""
    l2 = lam * lam
    return (lam * (1 + 2 * l2) ** 0.25 / (1 + l2)
            * math.atan(l2 / math.sqrt(1 + 2 * l2)) ** -0.5)


@dataclass(frozen=True)
class CompoundSigmoid(Activation):
    """``wS * sigmoid + wR * reverting`` on the unit-variance ellipse."""

    w_s: float
    w_r: float
    lam: float
    name = "compound"

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("compound sigmoid lambda must be positive")
        if self.w_s < 0 or self.w_r < 0:
            raise ConfigError("compound sigmoid weights must be nonnegative")
        e = self.w_s ** 2 + 2 * self.w_s * self.w_r * cos_delta(self.lam) + self.w_r ** 2
        if abs(e - 1) > 1e-12:
            raise ConfigError(
                f"weights violate the elliptical constraint (value {e!r}); "
                "use compound_sigmoid_make")

    @property
    def ratio(self) -> float:
        return math.inf if self.w_s == 0 else self.w_r / self.w_s

    def raw(self, z):
        return (self.w_s * SimpleSigmoid(self.lam)(z)
                + self.w_r * RevertingSigmoid(self.lam)(z))

    def to_config(self):
        return {"type": self.name, "lambda": self.lam, "ratio": self.ratio}


@dataclass(frozen=True, eq=False)
class Custom(Activation):
    """User-supplied ``psi``; normalized numerically so ``E[psi^2] = 1``."""

    psi: Callable
    dpsi: Callable | None = None
    breakpoints: tuple[float, ...] = ()
    name = "custom"
    _c: float = field(init=False, repr=False, default=1.0)

    def __post_init__(self):
        with np.errstate(over="ignore", invalid="ignore"):
            m2 = normal_expectation(lambda z: np.square(self.psi(z)), self.breakpoints)
        if not np.isfinite(m2):
            raise QuadratureError("custom activation: E[psi(Z)^2] is not finite")
        if not m2 > 0:
            raise ConfigError("custom activation has zero second moment")
        object.__setattr__(self, "_c", m2 ** -0.5)

    @property
    def c(self):
        return self._c

    def raw(self, z):
        return self.psi(z)


def compound_sigmoid_make(ratio: float, lam: float) -> CompoundSigmoid:
    """Compound sigmoid with ``w_R / w_S = ratio`` (``inf`` allowed)."""
    if ratio < 0 or math.isnan(ratio):
        raise ConfigError("ratio w_R/w_S must be nonnegative")
    if math.isinf(ratio):
        return CompoundSigmoid(0.0, 1.0, lam)
    w_s = 1 / math.sqrt(1 + 2 * ratio * cos_delta(lam) + ratio * ratio)
    return CompoundSigmoid(w_s, ratio * w_s, lam)


def normalization_constant(spec: Activation) -> float:
    """Constant ``c`` with ``E[(c * raw(Z))^2] = 1``."""
    return spec.c


# ---------------------------------------------------------------------------
# H_k


@dataclass(frozen=True)
class HkContext:
    """Lag data for ``H_k``: ``a_prev = a_{k-1}`` and ``rho = R_k``."""

    a_prev: float
    rho: float

    def __post_init__(self):
        if not -1 < self.rho < 1:
            raise ValueError(f"|rho| must be < 1 (the limit is irregular), got {self.rho}")


def h_k_closed(spec: Activation, ctx: HkContext) -> float:
    if not spec.has_closed_form:
        raise NotImplementedError(f"{spec.name} has no closed form; use h_k_quadrature")
    return float(spec.h_closed(ctx.a_prev, ctx.rho))


def h_k_quadrature(spec: Activation, ctx: HkContext, tol: float = 1e-10) -> float:
    """``H_k`` from the derivative-free expectation; valid for jumps in psi."""
    rho = ctx.rho
    denom = 2 * (1 - rho * rho)

    def integrand(z1, z2):
        p1 = spec(z1)
        return p1 * p1 * spec(z2) * (z1 - rho * z2) / denom

    return 2 * ctx.a_prev * bivariate_expectation(integrand, rho, spec.breakpoints, tol)


def h_k(spec: Activation, a_prev, rho, method: str = "auto"):
    """Vectorized ``H_k`` over arrays of ``a_prev`` and ``rho``."""
    if method == "auto":
        method = "closed" if spec.has_closed_form else "quadrature"
    if method == "closed":
        return np.asarray(spec.h_closed(a_prev, rho), dtype=float)
    a_prev, rho = np.broadcast_arrays(np.asarray(a_prev, float), np.asarray(rho, float))
    return np.array([h_k_quadrature(spec, HkContext(a, r))
                     for a, r in zip(a_prev.ravel(), rho.ravel())]).reshape(a_prev.shape)


def nonlinear_term_structure(f: LinearFilter, spec: Activation, Pmax: int,
                             method: str = "auto") -> MomentTermStructure:
    """Skewness term structure of ``psi(V_n)`` positions, ``P = 1 .. Pmax``."""
    r0 = autocovariance(f, 0)
    if not f.normalized or abs(r0 - 1) > 1e-10:
        raise ConfigError("nonlinear analysis needs a normalized filter (R_0 = 1)")
    if Pmax < 1:
        raise ValueError("Pmax must be >= 1")
    k = np.arange(1, Pmax)
    H = h_k(spec, weight(f, k - 1), autocovariance(f, k), method) if len(k) else np.zeros(0)
    # S_P = sum_{k<P} H_k ; Theta_P = Theta_{P-1} + 3 S_P
    S = np.concatenate([[0.0], np.cumsum(H)])
    theta = 3 * np.cumsum(S)
    P = np.arange(1, Pmax + 1)
    return MomentTermStructure.from_moments(P, P.astype(float), theta)


def reverting_asymptotic_sum(lam: float, N: float) -> float:
    """``sum_{k>=1} H_k`` for the reverting sigmoid on a normalized EMA1(N)."""
    alpha = 1 - 1 / N
    K = int(math.ceil(np.log(1e-17) / np.log(alpha))) + 1
    k = np.arange(1, K)
    a_prev = math.sqrt(1 - alpha ** 2) * alpha ** (k - 1)
    return float(np.sum(RevertingSigmoid(lam).h_closed(a_prev, alpha ** k)))


def reverting_positivity_threshold() -> float:
    """Positive root ``lam*`` of ``2 + 9 u + 7 u^2 - 8 u^3`` with ``u = lam^2``.

    Continuum approximation, for a slow EMA1, of where the long-horizon skew
    of the reverting sigmoid changes sign.
    """
    roots = solve_cubic(-8.0, 7.0, 9.0, 2.0)
    u = max(r.real for r in roots if r.imag == 0 and r.real > 0)
    return math.sqrt(u)


# ---------------------------------------------------------------------------
# Gaussian formulary


@dataclass(frozen=True)
class GaussianIdentities:
    even_moment_damped: float  # <Z^{2n} exp(-b^2 Z^2 / 2)>
    phi_affine: float  # <phi(a + bZ)>
    Phi_affine: float  # <Phi(a + bZ)>
    z_phi_affine: float  # <Z phi(a + bZ)>
    z_Phi_affine: float  # <Z Phi(a + bZ)>
    Phi_Phi: float  # <Phi(aZ) Phi(bZ)>
    D1: float
    D2: float
    D: float
    rho_hat: float


def reweight_bivariate(a1: float, a2: float, rho: float):
    """Constants of the Gaussian-damping change of measure.

    ``E[f(Z1,Z2) exp(-a1^2 Z1^2/2 - a2^2 Z2^2/2)]
      = D^{-1/2} E_hat[f(sqrt(D2/D) Z1, sqrt(D1/D) Z2)]``, correlation ``rho_hat``
    under ``E_hat``.
    """
    w = 1 - rho * rho
    D1 = w * a1 * a1 + 1
    D2 = w * a2 * a2 + 1
    D = w * a1 * a1 * a2 * a2 + a1 * a1 + a2 * a2 + 1
    return D1, D2, D, rho / math.sqrt(D1 * D2)


def gaussian_identity_suite(a: float, b: float, n: int, rho: float = 0.3) -> GaussianIdentities:
    """Closed forms of the standard normal expectations used for ``H_k``."""
    s = math.sqrt(1 + b * b)
    t = a / s
    dfact = math.prod(range(1, 2 * n, 2))
    D1, D2, D, rho_hat = reweight_bivariate(a, b, rho)
    return GaussianIdentities(
        even_moment_damped=dfact * (1 + b * b) ** (-(2 * n + 1) / 2),
        phi_affine=float(_phi(t)) / s,
        Phi_affine=float(ndtr(t)),
        z_phi_affine=-a * b / s ** 3 * float(_phi(t)),
        z_Phi_affine=b / s * float(_phi(t)),
        Phi_Phi=math.atan(a * b / math.sqrt(1 + a * a + b * b)) / (2 * math.pi) + 0.25,
        D1=D1, D2=D2, D=D, rho_hat=rho_hat,
    )
