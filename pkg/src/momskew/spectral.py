"""Quadratic-form view of the P-period trading return.

Stack the returns as ``u = (U_{n+P}, U_{n+P-1}, ..., U_{n+1}, U_n, U_{n-1}, ...)``.
Then ``Y = u' G u`` with ``G[r, s] = a_{s-r-1} / 2`` for ``r < P`` and
``s > r`` (symmetrized), and zero on the diagonal and on the all-history block.
History is truncated at ``L`` lags where the filter weights have decayed below
a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, NumericalError
from .filters import LinearFilter, autocovariance, weight


def truncation_lag(f: LinearFilter, tol: float = 1e-12) -> int:
    """Smallest ``L`` with ``max|alpha|^L < tol`` (times ``L`` for a double pole)."""
    m = f.coalesced if f.coalesced is not None else f.max_pole_modulus
    if m == 0:
        return 1
    L = max(1, math.ceil(math.log(tol) / math.log(m)))
    if f.coalesced is not None:
        while (L + 1) * m ** L >= tol:
            L += 1
    return L


@dataclass(frozen=True, eq=False)
class GammaOperator:
    P: int
    L: int
    matrix: np.ndarray
    filter: LinearFilter
    tol: float

    def quadratic(self, u) -> np.ndarray:
        """``u' G u`` for one vector or a stack of row vectors."""
        u = np.asarray(u, dtype=float)
        return np.einsum("...i,ij,...j->...", u, self.matrix, u)


def gamma_matrix(f: LinearFilter, P: int, tol: float = 1e-12) -> GammaOperator:
    if P < 1:
        raise ValueError("P must be >= 1")
    L = truncation_lag(f, tol)
    n = P + L
    a = weight(f, np.arange(n))
    G = np.zeros((n, n))
    for r in range(P):
        G[r, r + 1:] = 0.5 * a[: n - r - 1]
    G = G + G.T
    return GammaOperator(P, L, G, f, tol)


def trace_moments(g: GammaOperator) -> tuple[float, float, float]:
    """``(tr G, 2 tr G^2, 8 tr G^3)``: mean, second and third moments of ``Y``."""
    G = g.matrix
    G2 = G @ G
    return float(np.trace(G)), float(2 * np.sum(G * G)), float(8 * np.sum(G2 * G))


@dataclass(frozen=True)
class EigenSummary:
    eigenvalues: np.ndarray  # descending
    n_pos: int
    n_neg: int
    rank: int

    def as_record(self) -> dict:
        return {"n_pos": self.n_pos, "n_neg": self.n_neg, "rank": self.rank,
                "largest": float(self.eigenvalues[0]),
                "smallest": float(self.eigenvalues[-1]),
                "sum": float(np.sum(self.eigenvalues))}


def eigen_summary(g: GammaOperator, rel_threshold: float = 1e-10) -> EigenSummary:
    try:
        ev = np.linalg.eigvalsh(g.matrix)[::-1]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    cut = rel_threshold * np.max(np.abs(ev))
    n_pos = int(np.sum(ev > cut))
    n_neg = int(np.sum(ev < -cut))
    rank = n_pos + n_neg
    if rank > 2 * g.P:
        raise NumericalError(f"numerical rank {rank} exceeds the bound 2P = {2 * g.P}")
    return EigenSummary(ev, n_pos, n_neg, rank)


# ---------------------------------------------------------------------------
# moment generating function under Gaussian returns


def _tail_products(f: LinearFilter, P: int) -> np.ndarray:
    """``T[j, k] = sum_{m>=0} a_{j+m} a_{k+m}`` for ``j, k = 0 .. P-1``."""
    a = weight(f, np.arange(P))
    T = np.empty((P, P))
    for d in range(P):
        R = autocovariance(f, d)
        # sum_{m>=j} a_m a_{m+d} = R_d - sum_{m<j} a_m a_{m+d}
        head = np.concatenate([[0.0], np.cumsum(a[: P - d] * a[d:P])])
        j = np.arange(P - d)
        T[j, j + d] = R - head[j]
        T[j + d, j] = T[j, j + d]
    return T


@dataclass(frozen=True, eq=False)
class MgfMatrix:
    """``G(s) = s B + s^2 C``, the P x P matrix left after integrating out history."""

    P: int
    B: np.ndarray
    C: np.ndarray

    def at(self, s: float) -> np.ndarray:
        return s * self.B + s * s * self.C


def mgf_matrix(f: LinearFilter, P: int) -> MgfMatrix:
    if P < 1:
        raise ValueError("P must be >= 1")
    a = weight(f, np.arange(P))
    idx = np.arange(P)
    d = np.abs(idx[:, None] - idx[None, :])
    B = np.where(d > 0, 0.5 * a[np.maximum(d - 1, 0)], 0.0)
    C = 0.5 * _tail_products(f, P)
    return MgfMatrix(P, B, C)


def log_mgf(f: LinearFilter, P: int, s: float, M: MgfMatrix | None = None) -> float:
    """``log F_P(s) = -1/2 log det(I - 2 G(s))``.

    The determinant is taken from the eigenvalues of ``2 G(s)`` with ``log1p``,
    which keeps full relative accuracy for small ``s``.
    """
    M = M or mgf_matrix(f, P)
    lam = np.linalg.eigvalsh(2 * M.at(s))
    if np.any(lam >= 1):
        raise DomainError(f"s = {s!r} lies outside the convergence strip of the MGF")
    return float(-0.5 * np.sum(np.log1p(-lam)))


def mgf(f: LinearFilter, P: int, s: float) -> float:
    return math.exp(log_mgf(f, P, s))


def cumulants_exact(f: LinearFilter, P: int) -> tuple[float, float, float]:
    """Cumulants from the Taylor coefficients of ``log det``, no differencing."""
    M = mgf_matrix(f, P)
    B, C = M.B, M.C
    B2 = B @ B
    k2 = 2 * (np.trace(C) + np.trace(B2))
    k3 = 12 * np.sum(B * C) + 8 * np.sum(B2 * B)
    return float(np.trace(B)), float(k2), float(k3)


def _central_diffs(Lf, h):
    lp, lm = Lf(h), Lf(-h)
    l2p, l2m = Lf(2 * h), Lf(-2 * h)
    d1 = (8 * (lp - lm) - (l2p - l2m)) / (12 * h)
    d2 = (lp + lm) / (h * h)  # L(0) = 0
    d3 = (l2p - 2 * lp + 2 * lm - l2m) / (2 * h ** 3)
    return np.array([d1, d2, d3])


def cumulants_from_mgf(f: LinearFilter, P: int, h: float | None = None):
    """``(k1, k2, k3)`` by central differences of ``log F`` with Richardson steps.

    Step ``h = 1e-3 / sqrt(P R_0)`` is halved twice; the ``h^2`` and ``h^4``
    error terms are eliminated in turn.
    """
    M = mgf_matrix(f, P)
    Lf = lambda s: log_mgf(f, P, s, M)
    r0 = autocovariance(f, 0)
    if h is None:
        h = 1e-3 / math.sqrt(P * r0) if r0 > 0 else 1e-3
    D = [_central_diffs(Lf, h / 2 ** i) for i in range(3)]
    R1 = [(4 * D[i + 1] - D[i]) / 3 for i in range(2)]
    R2 = (16 * R1[1] - R1[0]) / 15
    scale = np.array([math.sqrt(P * r0), P * r0, (P * r0) ** 1.5]) if r0 > 0 else np.ones(3)
    first = np.abs(R1[0] - D[0])
    second = np.abs(R2 - R1[1])
    bad = (second > first) & (second > 1e-7 * scale)
    if np.any(bad):
        raise NumericalError(
            f"Richardson sequence not contracting for cumulant(s) {list(np.flatnonzero(bad) + 1)}")
    return float(R2[0]), float(R2[1]), float(R2[2])


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramCharlier:
    prob: float
    clamped: bool


def gram_charlier_prob(kappa3: float, sharpe: float) -> GramCharlier:
    """``P(Y > 0) ~ Phi(sharpe) - kappa3 / (6 sqrt(2 pi))``, clamped to [0, 1]."""
    p = float(ndtr(sharpe)) - kappa3 / (6 * math.sqrt(2 * math.pi))
    q = min(1.0, max(0.0, p))
    return GramCharlier(q, q != p)
