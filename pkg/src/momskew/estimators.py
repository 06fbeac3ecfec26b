"""Sample moments of P-period sums with bootstrap standard errors.

Sums are reduced to per-unit sufficient statistics ``(n, s1, s2, s3)``, where a
unit is a path (2-D input) or a single window (1-D input).  Bootstrap
replicates then only need a matrix product of resample counts with these
statistics.
"""

from __future__ import annotations

import numpy as np

from .termstructure import MomentTermStructure

N_BOOT = 400


def window_sums(x: np.ndarray, P: int, overlapping: bool) -> np.ndarray:
    """P-period sums along the last axis."""
    n = x.shape[-1]
    cs = np.concatenate([np.zeros(x.shape[:-1] + (1,)), np.cumsum(x, axis=-1)], axis=-1)
    if overlapping:
        return cs[..., P:] - cs[..., :-P]
    m = n // P
    return cs[..., P: m * P + 1: P] - cs[..., 0: (m - 1) * P + 1: P]


def _skew(stats: np.ndarray, central: bool):
    n, s1, s2, s3 = (stats[..., i] for i in range(4))
    with np.errstate(invalid="ignore", divide="ignore"):
        m1, m2, m3 = s1 / n, s2 / n, s3 / n
        if central:
            m3 = m3 - 3 * m1 * m2 + 2 * m1 ** 3
            m2 = m2 - m1 * m1
        k3 = np.where(m2 > 0, m3 / np.abs(m2) ** 1.5, np.nan)
    return m2, m3, k3


def _unit_stats(y: np.ndarray) -> np.ndarray:
    """``(n, sum y, sum y^2, sum y^3)`` over the last axis."""
    y2 = y * y
    return np.stack([np.full(y.shape[:-1], y.shape[-1], dtype=float),
                     y.sum(-1), y2.sum(-1), (y2 * y).sum(-1)], axis=-1)


def estimate_term_structure(pnl: np.ndarray, periods, *, central: bool = False,
                            overlapping: bool = False, seed: int = 0,
                            n_boot: int = N_BOOT, min_windows: int = 3,
                            with_se: bool = True) -> MomentTermStructure:
    """Moments of P-period sums of ``pnl`` (1-D series or paths x days).

    Periods with fewer than ``min_windows`` windows are dropped and flagged.
    Standard errors come from resampling paths when there are several, else
    resampling windows; overlapping windows get no SE.
    """
    x = np.asarray(pnl, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n_paths, n_days = x.shape
    rng = np.random.default_rng(seed)
    keep, mu2, mu3, k3, se, ns, flags = [], [], [], [], [], [], []
    path_counts = None
    for P in periods:
        P = int(P)
        if n_days < min_windows * P:
            flags.append(f"P={P} omitted: {n_days} days < {min_windows}*P")
            continue
        y = window_sums(x, P, overlapping)
        total = _unit_stats(y).sum(axis=0)
        m2, m3, kk = _skew(total, central)
        keep.append(P)
        mu2.append(m2)
        mu3.append(m3)
        k3.append(kk)
        ns.append(int(total[0]))
        if not with_se or overlapping:
            se.append(np.nan)
            continue
        if n_paths >= 2:
            if path_counts is None:
                path_counts = rng.multinomial(n_paths, np.full(n_paths, 1 / n_paths), size=n_boot)
            units, counts = _unit_stats(y), path_counts
        else:
            units = _unit_stats(y[0][:, None])
            m = len(units)
            counts = rng.multinomial(m, np.full(m, 1 / m), size=n_boot)
        boot = _skew(counts.astype(float) @ units, central)[2]
        se.append(float(np.nanstd(boot, ddof=1)))
    ts = MomentTermStructure.from_moments(
        np.array(keep, dtype=np.int64), np.array(mu2), np.array(mu3),
        se_kappa3=np.array(se) if with_se else None,
        n_samples=np.array(ns, dtype=np.int64), flags=flags)
    return ts
