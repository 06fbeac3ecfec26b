"""Seeded Monte Carlo engine for momentum strategy P&L.

Every path draws from its own Philox stream keyed by ``(seed, path_index)``,
so the output does not depend on how paths are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .backtest import PriceSeries, run_strategy
from .errors import ConfigError
from .estimators import N_BOOT, estimate_term_structure
from .filters import LinearFilter, apply_filter
from .nonlinear import Activation, Linear
from .termstructure import MomentTermStructure

DISTRIBUTIONS = ("gaussian", "rademacher", "uniform_scaled", "student_t")
_MASK64 = (1 << 64) - 1


def slowest_period(f: LinearFilter) -> float:
    m = f.max_pole_modulus
    return 1.0 if m == 0 else 1 / (1 - m)


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    ``horizon`` counts all simulated days including ``burn_in``; ``burn_in``
    of None means 20 times the slowest filter period.
    """

    seed: int = 0
    n_paths: int = 100
    horizon: int = 10_000
    burn_in: int | None = None
    distribution: str = "gaussian"
    df: float | None = None
    Pmax: int = 200
    periods: tuple[int, ...] | None = None
    workers: int = 1
    n_boot: int = N_BOOT

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if self.distribution == "student_t":
            if self.df is None or not self.df > 6:
                raise ConfigError("student_t needs df > 6 so sixth moments exist")
        elif self.df is not None:
            raise ConfigError("df only applies to student_t")
        if self.n_paths < 1 or self.horizon < 1 or self.Pmax < 1 or self.workers < 1:
            raise ConfigError("n_paths, horizon, Pmax and workers must be positive")
        if self.burn_in is not None and not 0 <= self.burn_in <= self.horizon:
            raise ConfigError("burn_in must lie in [0, horizon]")
        if self.periods is not None:
            object.__setattr__(self, "periods", tuple(int(p) for p in self.periods))

    def resolved_burn_in(self, f: LinearFilter) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return min(self.horizon, int(math.ceil(20 * slowest_period(f))))

    def period_list(self) -> tuple[int, ...]:
        return self.periods if self.periods is not None else tuple(range(1, self.Pmax + 1))

    def to_dict(self) -> dict:
        return asdict(self)


def path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(path << 64) | (seed & _MASK64)))


def draw_returns(rng: np.random.Generator, n: int, distribution: str, df=None) -> np.ndarray:
    """i.i.d. draws with mean 0, variance 1 and zero third moment."""
    if distribution == "gaussian":
        return rng.standard_normal(n)
    if distribution == "rademacher":
        return 2.0 * rng.integers(0, 2, n) - 1.0
    if distribution == "uniform_scaled":
        return rng.uniform(-math.sqrt(3), math.sqrt(3), n)
    if distribution == "student_t":
        return rng.standard_t(df, n) * math.sqrt((df - 2) / df)
    raise ConfigError(f"unknown distribution {distribution!r}")


def _check(cfg: SimConfig, f: LinearFilter, spec: Activation) -> list[str]:
    flags = []
    if not isinstance(spec, Linear):
        if not f.normalized:
            raise ConfigError("a nonlinear activation needs a normalized filter")
        if cfg.distribution != "gaussian":
            flags.append("nonlinear closed forms assume gaussian returns; "
                         f"simulated with {cfg.distribution}")
    return flags


def _simulate_chunk(args):
    cfg, f, spec, lo, hi = args
    burn = cfg.resolved_burn_in(f)
    U = np.stack([draw_returns(path_rng(cfg.seed, p), cfg.horizon + 1, cfg.distribution, cfg.df)
                  for p in range(lo, hi)])
    V = apply_filter(f, U[:, :-1], axis=1)
    pnl = spec(V) * U[:, 1:]
    return pnl[:, burn:]


def _chunks(n: int, workers: int):
    size = max(1, math.ceil(n / (4 * workers))) if workers > 1 else n
    return [(lo, min(n, lo + size)) for lo in range(0, n, size)]


def simulate_pnl_paths(cfg: SimConfig, f: LinearFilter, spec: Activation | None = None) -> np.ndarray:
    """Daily P&L ``psi(V_n) U_{n+1}`` after burn-in, shape ``(n_paths, horizon - burn_in)``."""
    spec = spec or Linear()
    _check(cfg, f, spec)
    jobs = [(cfg, f, spec, lo, hi) for lo, hi in _chunks(cfg.n_paths, cfg.workers)]
    if cfg.workers == 1:
        parts = [_simulate_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(_simulate_chunk, jobs))
    return np.concatenate(parts, axis=0)


def simulate_term_structure(cfg: SimConfig, f: LinearFilter,
                            spec: Activation | None = None) -> MomentTermStructure:
    """Moments about zero of non-overlapping P-period P&L, pooled over paths.

    Standard errors resample whole paths.
    """
    spec = spec or Linear()
    flags = _check(cfg, f, spec)
    pnl = simulate_pnl_paths(cfg, f, spec)
    ts = estimate_term_structure(pnl, cfg.period_list(), central=False, overlapping=False,
                                 seed=cfg.seed, n_boot=cfg.n_boot, min_windows=1)
    ts.flags = flags + ts.flags
    return ts


@dataclass
class ScenarioResult:
    cumulative_pnl: np.ndarray  # risk-adjusted, aligned with prices; NaN during warm-up
    positions: np.ndarray
    flags: list[str] = field(default_factory=list)

    @property
    def final(self) -> float:
        return float(self.cumulative_pnl[-1])


def scenario_run(prices, f: LinearFilter, spec: Activation | None = None, N_vol: float = 20,
                 vol_floor: float = 1e-12) -> ScenarioResult:
    """Backtest pipeline on a user-supplied deterministic price path.

    ``vol_floor`` keeps the volatility estimate positive on flat stretches, so
    a flat path produces zero P&L rather than an error.
    """
    spec = spec or Linear()
    if not isinstance(prices, PriceSeries):
        prices = PriceSeries.from_values(prices, meta="scenario")
    run = run_strategy(prices, f, spec, N_vol=N_vol, vol_floor=vol_floor)
    cum = np.full(len(run.pnl), np.nan)
    start = run.first_pnl_index
    cum[start:] = np.cumsum(run.pnl[start:])
    return ScenarioResult(cum, run.signal_position, run.flags)
