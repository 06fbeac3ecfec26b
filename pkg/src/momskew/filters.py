"""Linear momentum filters in pole-residue form.

A filter with weights ``a_0, a_1, ...`` acting on risk-adjusted returns is stored
through its system function

    A(z) = gain * (a0 + sum_j rho_j / (z - alpha_j)),

so that ``a_0 = gain * a0`` and ``a_j = gain * sum_k rho_k alpha_k**(j-1)`` for
``j >= 1``.  The equal-speed double EMA has a double pole; it is kept as a
separate closed-form case (``coalesced``) rather than as a general
multiple-pole representation.

Continuous-time kernels (EMA1, EMA2, EMA2=) live at the bottom of the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidPeriodError, PoleError, SPRZError

POLE_SEPARATION = 1e-10
MERGE_TOLERANCE = 1e-14
_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class LinearFilter:
    """Causal moving-average filter in pole-residue form.

    Parameters
    ----------
    poles, residues : tuple of complex
        Simple poles ``alpha_j`` and the residues of ``A(z)`` there.
    a0 : float
        Limit of ``A(z)`` as ``z -> inf`` (leading weight before ``gain``).
    gain : float
        Overall scale applied to every weight.
    normalized : bool
        True if the lag-0 autocovariance is one.
    coalesced : float, optional
        If set, the filter is the equal-speed double EMA with weights
        ``gain * (j + 1) * coalesced**j``; ``poles``/``residues`` are empty.
    label : str
        Free-form description carried into reports.
    """

    poles: tuple[complex, ...] = ()
    residues: tuple[complex, ...] = ()
    a0: float = 0.0
    gain: float = 1.0
    normalized: bool = False
    coalesced: float | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        residues = tuple(complex(r) for r in self.residues)
        if len(poles) != len(residues):
            raise ValueError("poles and residues must have equal length")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "gain", float(self.gain))
        if self.coalesced is not None:
            if poles:
                raise ValueError("coalesced filter carries no simple poles")
            if not 0.0 < self.coalesced < 1.0:
                raise SPRZError("coalesced pole must lie in (0, 1)")
            object.__setattr__(self, "coalesced", float(self.coalesced))
        _check_conjugate_symmetry(poles, residues)

    @property
    def n_poles(self) -> int:
        return 2 if self.coalesced is not None else len(self.poles)

    @property
    def max_pole_modulus(self) -> float:
        if self.coalesced is not None:
            return self.coalesced
        return max((abs(p) for p in self.poles), default=0.0)

    def weights(self, n: int) -> np.ndarray:
        """First ``n`` weights ``a_0 .. a_{n-1}``."""
        return weight(self, np.arange(n))

    def __neg__(self) -> "LinearFilter":
        return replace(self, gain=-self.gain, label=f"-({self.label})")

    def scaled(self, c: float) -> "LinearFilter":
        return replace(self, gain=self.gain * c, normalized=False)


def _check_conjugate_symmetry(poles, residues):
    for p, r in zip(poles, residues):
        if abs(p.imag) <= _IMAG_TOL:
            if abs(r.imag) > _IMAG_TOL * max(1.0, abs(r)):
                raise ValueError(f"real pole {p.real} has complex residue {r}")
            continue
        match = [
            r2 for p2, r2 in zip(poles, residues)
            if abs(p2 - p.conjugate()) <= _IMAG_TOL
        ]
        if not match:
            raise ValueError(f"complex pole {p} has no conjugate partner")
        if abs(match[0] - r.conjugate()) > _IMAG_TOL * max(1.0, abs(r)):
            raise ValueError(f"residue at {p.conjugate()} is not conjugate to {r}")


def _check_separation(poles: Sequence[complex]):
    for i, p in enumerate(poles):
        for q in poles[i + 1:]:
            if abs(p - q) < POLE_SEPARATION:
                raise PoleError(
                    f"poles {p} and {q} are closer than {POLE_SEPARATION:g}; "
                    "coalesce them explicitly"
                )


def _alpha(N: float) -> float:
    if not N >= 1:
        raise InvalidPeriodError(f"EMA period must be >= 1, got {N!r}")
    return 1.0 - 1.0 / N


# ---------------------------------------------------------------------------
# constructors


def make_ema1(N: float, normalized: bool = False) -> LinearFilter:
    """Single EMA of returns, ``a_j = alpha**(j+1)`` with ``alpha = 1 - 1/N``.

    The normalized version has ``a_j = sqrt(1 - alpha**2) alpha**j`` so that
    ``R_k = alpha**k``.
    """
    alpha = _alpha(N)
    label = f"EMA1({N:g})"
    if alpha == 0.0:
        # N = 1: all weights vanish, or pass-through once normalized
        return LinearFilter(a0=1.0 if normalized else 0.0, normalized=normalized,
                            label=label)
    f = LinearFilter((alpha,), (alpha * alpha,), a0=alpha, label=label)
    if normalized:
        return replace(f, gain=math.sqrt(1.0 - alpha * alpha) / alpha,
                       normalized=True)
    return f


def make_ema2(N_alpha: float, N_beta: float, normalized: bool = False) -> LinearFilter:
    """Double EMA, ``a_j = (alpha**(j+1) - beta**(j+1)) / (alpha - beta)``.

    Equal speeds give the coalesced limit ``a_j = (j+1) alpha**j``.
    """
    a, b = _alpha(N_alpha), _alpha(N_beta)
    label = f"EMA2({N_alpha:g},{N_beta:g})"
    if a == b:
        if a == 0.0:
            f = LinearFilter(a0=1.0, label=label)
        else:
            f = LinearFilter(a0=1.0, coalesced=a, label=label)
    elif abs(a - b) < POLE_SEPARATION:
        raise PoleError(
            f"EMA speeds {N_alpha!r} and {N_beta!r} give poles closer than "
            f"{POLE_SEPARATION:g}; pass equal periods for the coalesced filter"
        )
    elif a == 0.0 or b == 0.0:
        p = a or b
        f = LinearFilter((p,), (p,), a0=1.0, label=label)
    else:
        f = LinearFilter((a, b), (a * a / (a - b), b * b / (b - a)), a0=1.0,
                         label=label)
    return normalize(f) if normalized else f


def make_crossover(N_alpha: float, N_beta: float) -> LinearFilter:
    """Difference of two single EMAs, ``|beta**(j+1) - alpha**(j+1)|``.

    This is the EMA2 shape scaled by ``|alpha - beta|`` and is the component
    used when fast and slow momenta are mixed with multipliers.
    """
    a, b = _alpha(N_alpha), _alpha(N_beta)
    f = make_ema2(N_alpha, N_beta)
    if a == b:
        raise PoleError("crossover of equal speeds has zero weights")
    return replace(f.scaled(abs(a - b)), label=f"XO({N_alpha:g},{N_beta:g})")


def normalize(f: LinearFilter) -> LinearFilter:
    """Rescale ``f`` so that its lag-0 autocovariance equals one."""
    r0 = autocovariance(f, 0)
    if not r0 > 0:
        raise ValueError("cannot normalize a filter with zero weights")
    return replace(f, gain=f.gain / math.sqrt(r0), normalized=True)


def combine(
    filters: Sequence[LinearFilter],
    weights: Sequence[float],
    merge: bool = False,
) -> LinearFilter:
    """Weighted sum of filters as a single pole-residue filter.

    Coincident poles from different components are rejected unless ``merge``
    is true, in which case poles equal to within 1e-14 have their residues
    summed.  Distinct poles closer than 1e-10 are always rejected.
    """
    if len(filters) != len(weights):
        raise ValueError("need one weight per filter")
    poles: list[complex] = []
    residues: list[complex] = []
    a0 = 0.0
    for f, w in zip(filters, weights):
        if f.coalesced is not None:
            raise PoleError(f"cannot combine coalesced filter {f.label}; "
                            "use distinct speeds")
        scale = float(w) * f.gain
        a0 += scale * f.a0
        for p, r in zip(f.poles, f.residues):
            hit = [i for i, q in enumerate(poles) if abs(p - q) < POLE_SEPARATION]
            if hit:
                i = hit[0]
                if merge and abs(p - poles[i]) <= MERGE_TOLERANCE:
                    residues[i] += scale * r
                    continue
                raise PoleError(f"coincident poles {poles[i]} and {p} in combine")
            poles.append(p)
            residues.append(scale * r)
    if len(filters) == 1 and float(weights[0]) == 1.0:
        return filters[0]
    label = " + ".join(f"{float(w):g}*{f.label}" for f, w in zip(filters, weights))
    return LinearFilter(tuple(poles), tuple(residues), a0=a0, label=label)


# ---------------------------------------------------------------------------
# evaluation


def weight(f: LinearFilter, j):
    """Filter weight ``a_j`` (scalar or array of nonnegative integers)."""
    j_arr = np.asarray(j)
    scalar = j_arr.ndim == 0
    j_arr = np.atleast_1d(j_arr).astype(np.int64)
    if f.coalesced is not None:
        out = f.gain * (j_arr + 1.0) * f.coalesced ** j_arr
    else:
        out = np.zeros(j_arr.shape)
        lag = np.maximum(j_arr - 1, 0)
        acc = np.zeros(j_arr.shape, dtype=complex)
        for p, r in zip(f.poles, f.residues):
            acc += r * p ** lag
        out = np.where(j_arr == 0, f.a0, acc.real) * f.gain
    return float(out[0]) if scalar else out


def autocovariance(f: LinearFilter, k):
    """Exact ``R_k = sum_j a_j a_{j+k}`` from geometric pole sums."""
    k_arr = np.asarray(k)
    scalar = k_arr.ndim == 0
    k_arr = np.atleast_1d(k_arr).astype(np.int64)
    if np.any(k_arr < 0):
        raise ValueError("autocovariance lag must be nonnegative")
    g2 = f.gain * f.gain
    if f.coalesced is not None:
        a = f.coalesced
        x = a * a
        out = g2 * a ** k_arr * ((1 + x) / (1 - x) ** 3 + k_arr / (1 - x) ** 2)
    else:
        unit = replace(f, gain=1.0)
        acc = f.a0 * weight(unit, k_arr).astype(complex)
        for p, rp in zip(f.poles, f.residues):
            for q, rq in zip(f.poles, f.residues):
                acc += rp * rq * q ** k_arr / (1 - p * q)
        out = g2 * acc.real
    return float(out[0]) if scalar else out


def system_value(f: LinearFilter, z: complex) -> complex:
    """``A(z)``, the z-transform of the weights (rational continuation)."""
    z = complex(z)
    if f.coalesced is not None:
        d = z - f.coalesced
        if d == 0:
            raise PoleError(f"A(z) evaluated at its pole {f.coalesced}")
        return f.gain * z * z / (d * d)
    total = complex(f.a0)
    for p, r in zip(f.poles, f.residues):
        if z == p:
            raise PoleError(f"A(z) evaluated at its pole {p}")
        total += r / (z - p)
    return f.gain * total


def value_at_origin(f: LinearFilter) -> float:
    """``A(0)``; zero for every EMA-type filter."""
    if f.coalesced is not None:
        return 0.0
    return f.gain * (f.a0 - sum(r / p for p, r in zip(f.poles, f.residues))).real


@dataclass(frozen=True)
class SPRZReport:
    """Diagnostic for the simple-poles, regular-at-zero conditions."""

    pole_moduli: tuple[float, ...]
    min_separation: float
    inside_unit_circle: bool
    nonzero_poles: bool
    simple_poles: bool
    regular_at_zero: bool
    limit_form: bool
    origin_residue: float
    origin_residue_mismatch: bool

    @property
    def passed(self) -> bool:
        return (self.inside_unit_circle and self.nonzero_poles
                and self.simple_poles and self.regular_at_zero)


def sprz_check(f: LinearFilter) -> SPRZReport:
    """Report pole moduli, separation and regularity at the origin.

    ``origin_residue`` is the residue of ``A(z) A(1/z) / z`` at zero, which is
    ``A(0) * a0``; the mismatch flag marks filters where this differs from
    ``A(0)**2``.
    """
    if f.coalesced is not None:
        return SPRZReport((f.coalesced, f.coalesced), 0.0, True, True, False,
                          True, True, 0.0, False)
    moduli = tuple(abs(p) for p in f.poles)
    seps = [abs(p - q) for i, p in enumerate(f.poles) for q in f.poles[i + 1:]]
    min_sep = min(seps) if seps else math.inf
    nonzero = all(m > 0 for m in moduli)
    a_origin = value_at_origin(f) if nonzero else math.nan
    residue0 = a_origin * f.gain * f.a0
    mismatch = nonzero and abs(residue0 - a_origin ** 2) > 1e-12 * max(1.0, abs(residue0))
    return SPRZReport(
        pole_moduli=moduli,
        min_separation=min_sep,
        inside_unit_circle=all(m < 1 for m in moduli),
        nonzero_poles=nonzero,
        simple_poles=min_sep >= POLE_SEPARATION,
        regular_at_zero=nonzero,
        limit_form=False,
        origin_residue=residue0,
        origin_residue_mismatch=bool(mismatch),
    )


def require_sprz(f: LinearFilter, allow_coalesced: bool = True) -> None:
    rep = sprz_check(f)
    if rep.limit_form and allow_coalesced:
        return
    if not rep.passed:
        raise SPRZError(f"filter {f.label or f} fails SPRZ check: {rep}")


def apply_filter(f: LinearFilter, u: np.ndarray, axis: int = 0) -> np.ndarray:
    """Run the filter recursively over ``u`` along ``axis`` from a zero state.

    Returns ``V_n = sum_{j=0}^{n} a_j u_{n-j}``.
    """
    u = np.asarray(u, dtype=float)
    if f.coalesced is not None:
        a = f.coalesced
        return f.gain * lfilter([1.0], [1.0, -2 * a, a * a], u, axis=axis)
    out = f.a0 * u
    done: set[int] = set()
    for i, (p, r) in enumerate(zip(f.poles, f.residues)):
        if i in done:
            continue
        s = lfilter([0.0, 1.0], [1.0, -p], u.astype(complex if p.imag else float),
                    axis=axis)
        if p.imag:
            # conjugate partner contributes the complex conjugate
            j = next(j for j, q in enumerate(f.poles)
                     if j != i and abs(q - p.conjugate()) <= _IMAG_TOL)
            done.add(j)
            out = out + 2.0 * (r * s).real
        else:
            out = out + r.real * s.real
    return f.gain * out


# ---------------------------------------------------------------------------
# continuous-time kernels


@dataclass(frozen=True)
class ContinuousKernel:
    """Continuous-time momentum kernel ``K(t)``.

    ``kind`` is ``"ema1"`` (``e^{-a t}``), ``"ema2"`` (``e^{-a t} - e^{-b t}``)
    or ``"ema2eq"`` (``t e^{-a t}``); ``alpha``/``beta`` are rates in 1/time.
    """

    kind: str
    alpha: float
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("ema1", "ema2", "ema2eq"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.alpha > 0:
            raise ValueError("kernel rate alpha must be positive")
        if self.kind == "ema2" and not (self.beta is not None and self.beta > self.alpha):
            raise ValueError("EMA2 kernel needs beta > alpha")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a = self.alpha
        if self.kind == "ema1":
            return np.exp(-a * t)
        if self.kind == "ema2":
            return np.exp(-a * t) - np.exp(-self.beta * t)
        return t * np.exp(-a * t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        a = self.alpha
        if self.kind == "ema1":
            return -a * np.exp(-a * t)
        if self.kind == "ema2":
            return -a * np.exp(-a * t) + self.beta * np.exp(-self.beta * t)
        return (1 - a * t) * np.exp(-a * t)


def square_norm(k: ContinuousKernel) -> float:
    """``int_0^inf K(t)^2 dt``, the output variance under unit Brownian input."""
    a = k.alpha
    if k.kind == "ema1":
        return 1 / (2 * a)
    if k.kind == "ema2":
        b = k.beta
        return (a - b) ** 2 / (2 * a * b * (a + b))
    return 1 / (4 * a ** 3)


def derivative_square_norm(k: ContinuousKernel) -> float:
    """``int_0^inf K'(t)^2 dt``."""
    a = k.alpha
    if k.kind == "ema1":
        return a / 2
    if k.kind == "ema2":
        b = k.beta
        return (a - b) ** 2 / (2 * (a + b))
    return 1 / (4 * a)


@dataclass(frozen=True)
class PathLength:
    finite: bool
    rate: float | None


def path_length_class(k: ContinuousKernel) -> PathLength:
    """Finite path length iff ``K(0) == 0``; the rate is ``sqrt(2 |K'|^2 / pi)``."""
    if float(k(0.0)) != 0.0:
        return PathLength(False, None)
    return PathLength(True, math.sqrt(2 * derivative_square_norm(k) / math.pi))


def variational_residual(alpha_dot: float, t: float) -> float:
    """Residual of ``K'' + (lam + mu/t) K = 0`` for ``K = t exp(-alpha_dot t)``.

    Multipliers are ``lam = -alpha_dot**2`` and ``mu = 2 alpha_dot``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    a = alpha_dot
    e = math.exp(-a * t)
    K = t * e
    K2 = (a * a * t - 2 * a) * e
    lam, mu = -a * a, 2 * a
    return K2 + (lam + mu / t) * K
