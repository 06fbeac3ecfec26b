"""Empirical pipeline: prices, volatility normalization, strategy P&L, skew.

Index conventions (arrays are aligned with the price array ``X_0 .. X_T``):

* ``d_n = X_n - X_{n-1}`` for ``n >= 1``;
* ``sigma_hat_n`` is defined from ``n = m = ceil(N_vol)`` on;
* ``U_n = d_n / sigma_hat_{n-1}`` from ``n = m + 1`` on;
* ``V_n`` filters ``U_{m+1} .. U_n`` from a zero state;
* ``pnl_{n+1} = psi(V_n) U_{n+1}``, first defined at ``n + 1 = m + 2``.

Undefined entries are NaN.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .estimators import estimate_term_structure, window_sums
from .filters import LinearFilter, apply_filter
from .nonlinear import Activation, Linear
from .spectral import gram_charlier_prob
from .termstructure import MomentTermStructure


@dataclass(frozen=True, eq=False)
class PriceSeries:
    dates: np.ndarray  # datetime64[D]
    prices: np.ndarray
    meta: str = ""
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        d = np.asarray(self.dates, dtype="datetime64[D]")
        p = np.asarray(self.prices, dtype=float)
        if d.shape != p.shape or p.ndim != 1:
            raise DataError("dates and prices must be 1-D and of equal length")
        if len(p) == 0:
            raise DataError("empty price series")
        if not np.all(np.isfinite(p)):
            raise DataError(f"non-finite price at index {int(np.flatnonzero(~np.isfinite(p))[0])}")
        if np.any(np.diff(d) <= np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "prices", p)

    def __len__(self):
        return len(self.prices)

    @classmethod
    def from_values(cls, prices, start: str = "2000-01-01", meta: str = "") -> "PriceSeries":
        """Series on consecutive calendar days, for synthetic paths."""
        p = np.asarray(prices, dtype=float)
        dates = np.datetime64(start, "D") + np.arange(len(p))
        return cls(dates, p, meta)

    def truncated(self, n: int) -> "PriceSeries":
        """First ``n + 1`` observations (data through day ``n``)."""
        return PriceSeries(self.dates[: n + 1], self.prices[: n + 1], self.meta, self.flags)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "price"])
            for d, p in zip(self.dates, self.prices):
                w.writerow([str(d), repr(float(p))])


def load_prices(path, date_col: str = "date", price_col: str = "price",
                meta: str | None = None) -> PriceSeries:
    """Read a delimited ``date,price`` file (ISO-8601 dates, header required)."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        missing = {date_col, price_col} - set(reader.fieldnames)
        if missing:
            raise DataError(f"{path}: missing column(s) {sorted(missing)}")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                d = dt.date.fromisoformat(row[date_col].strip())
                p = float(row[price_col])
            except (ValueError, TypeError, AttributeError) as exc:
                raise DataError(f"{path}: row {i}: cannot parse {row!r} ({exc})") from None
            if not math.isfinite(p):
                raise DataError(f"{path}: row {i}: non-finite price")
            rows.append((d, p, i))
    if not rows:
        raise DataError(f"{path}: no data rows")
    flags = []
    if any(a[0] > b[0] for a, b in zip(rows, rows[1:])):
        rows.sort(key=lambda r: r[0])
        flags.append("dates were out of order and have been sorted")
    for a, b in zip(rows, rows[1:]):
        if a[0] == b[0]:
            raise DataError(f"{path}: duplicate date {a[0].isoformat()} (rows {a[2]} and {b[2]})")
    dates = np.array([r[0] for r in rows], dtype="datetime64[D]")
    return PriceSeries(dates, np.array([r[1] for r in rows]), meta or path.stem, tuple(flags))


@dataclass(frozen=True, eq=False)
class RiskAdjustedSeries:
    sigma_hat: np.ndarray
    u: np.ndarray
    start_index: int  # first n with sigma_hat defined
    flags: tuple[str, ...] = ()

    @property
    def first_u_index(self) -> int:
        return self.start_index + 1


def _changes(p: PriceSeries, returns: str) -> np.ndarray:
    x = p.prices
    d = np.full(len(x), np.nan)
    if returns == "absolute":
        d[1:] = np.diff(x)
    elif returns == "relative":
        if np.any(x <= 0):
            raise DataError("relative returns need strictly positive prices")
        d[1:] = x[1:] / x[:-1] - 1
    else:
        raise ConfigError(f"returns must be 'absolute' or 'relative', got {returns!r}")
    return d


def vol_estimate(p: PriceSeries, N_vol: float = 20, *, returns: str = "absolute",
                 vol_floor: float | None = None, u_cap: float | None = None) -> RiskAdjustedSeries:
    """EMA of squared changes, seeded with their mean over the first ``ceil(N_vol)`` days."""
    if not N_vol >= 1:
        raise ConfigError("N_vol must be >= 1")
    m = int(math.ceil(N_vol))
    if len(p) < m + 2:
        raise DataError(f"need at least {m + 2} prices for N_vol={N_vol}, got {len(p)}")
    d = _changes(p, returns)
    d2 = d * d
    v = np.full(len(d), np.nan)
    v[m] = np.mean(d2[1: m + 1])
    if v[m] == 0 and vol_floor is None:
        raise DataError("zero price variance over the volatility seed window")
    lam = 1 - 1 / N_vol
    for n in range(m + 1, len(d)):
        v[n] = lam * v[n - 1] + d2[n] / N_vol
    sigma = np.sqrt(v)
    if vol_floor is not None:
        sigma[m:] = np.maximum(sigma[m:], vol_floor)
    u = np.full(len(d), np.nan)
    u[m + 1:] = d[m + 1:] / sigma[m:-1]
    flags = ()
    if u_cap is not None:
        u[m + 1:] = np.clip(u[m + 1:], -u_cap, u_cap)
        flags = (f"non-canonical: U capped at +/-{u_cap}",)
    return RiskAdjustedSeries(sigma, u, m, flags)


@dataclass(frozen=True, eq=False)
class StrategyRun:
    V: np.ndarray  # momentum factor
    signal_position: np.ndarray  # psi(V_n), risk units
    position: np.ndarray  # psi(V_n) / sigma_hat_n, price units
    pnl: np.ndarray  # psi(V_{n-1}) U_n at index n
    first_pnl_index: int
    risk: RiskAdjustedSeries
    flags: list[str] = field(default_factory=list)

    def pnl_series(self) -> np.ndarray:
        return self.pnl[self.first_pnl_index:]


def run_strategy(p: PriceSeries, f: LinearFilter, spec: Activation | None = None,
                 N_vol: float = 20, *, burn_in: int = 0, returns: str = "absolute",
                 vol_floor: float | None = None, u_cap: float | None = None) -> StrategyRun:
    """Causal strategy P&L; ``burn_in`` extra days are skipped for filter warm-up."""
    spec = spec or Linear()
    if not isinstance(spec, Linear) and not f.normalized:
        raise ConfigError("a nonlinear activation needs a normalized filter")
    risk = vol_estimate(p, N_vol, returns=returns, vol_floor=vol_floor, u_cap=u_cap)
    s = risk.first_u_index
    if len(p) < s + 2 + burn_in:
        raise DataError("price series too short for one P&L observation after warm-up")
    V = np.full(len(p), np.nan)
    V[s:] = apply_filter(f, risk.u[s:])
    sig = np.full(len(p), np.nan)
    sig[s:] = spec(V[s:])
    pnl = np.full(len(p), np.nan)
    pnl[s + 1:] = sig[s:-1] * risk.u[s + 1:]
    flags = list(p.flags) + list(risk.flags)
    return StrategyRun(V, sig, sig / risk.sigma_hat, pnl, s + 1 + burn_in, risk, flags)


def _clean(pnl) -> np.ndarray:
    x = np.asarray(pnl, dtype=float)
    if x.ndim == 1:
        x = x[np.isfinite(x)] if np.isnan(x[:1]).any() else x
    if not np.all(np.isfinite(x)):
        raise DataError("P&L contains non-finite values after the warm-up")
    return x


def empirical_term_structure(pnl, Pmax: int, mode: str = "central",
                             window: str = "overlapping", *, periods=None,
                             seed: int = 0) -> MomentTermStructure:
    """Skewness of P-period P&L sums.

    ``mode`` is ``central`` (about the sample mean) or ``noncentral`` (about
    zero).  Overlapping windows are the default; SEs only for ``disjoint``.
    Periods with fewer than ``3P`` days are omitted and flagged.
    """
    if mode not in ("central", "noncentral"):
        raise ConfigError(f"mode must be central or noncentral, got {mode!r}")
    if window not in ("overlapping", "disjoint"):
        raise ConfigError(f"window must be overlapping or disjoint, got {window!r}")
    x = _clean(pnl)
    periods = periods if periods is not None else range(1, Pmax + 1)
    return estimate_term_structure(x, periods, central=mode == "central",
                                   overlapping=window == "overlapping", seed=seed,
                                   min_windows=3, with_se=window == "disjoint")


@dataclass(frozen=True)
class PerformanceSummary:
    P: int
    sharpe: float | None
    kappa3: float | None
    win_fraction: float
    gram_charlier: float | None
    n_windows: int
    flags: tuple[str, ...] = ()


def performance_summary(pnl, P: int, window: str = "overlapping") -> PerformanceSummary:
    """P-period Sharpe ``k1 / sqrt(k2)``, skew and win rate vs Gram-Charlier."""
    x = _clean(pnl)
    if x.ndim != 1:
        x = x.ravel()
    if len(x) < P:
        raise DataError(f"need at least P={P} days")
    y = window_sums(x, P, window == "overlapping")
    k1 = float(np.mean(y))
    k2 = float(np.mean((y - k1) ** 2))
    win = float(np.mean(y > 0))
    if not k2 > 0:
        return PerformanceSummary(P, None, None, win, None, len(y),
                                  ("undefined Sharpe ratio: zero variance",))
    k3 = float(np.mean((y - k1) ** 3) / k2 ** 1.5)
    sharpe = k1 / math.sqrt(k2)
    gc = gram_charlier_prob(k3, sharpe)
    flags = ("Gram-Charlier value clamped",) if gc.clamped else ()
    return PerformanceSummary(P, sharpe, k3, win, gc.prob, len(y), flags)
