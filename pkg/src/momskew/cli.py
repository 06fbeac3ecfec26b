"""Command-line entry point: ``momskew <command> --config cfg.json --out DIR``.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import (
    PriceSeries,
    empirical_term_structure,
    load_prices,
    performance_summary,
    run_strategy,
)
from .config import (
    _check_keys,
    _num,
    load_config,
    resolve_activation,
    resolve_filter,
    resolve_sim,
)
from .errors import ConfigError, DataError, NumericalError, PoleError, SPRZError
from .filters import make_crossover
from .linear import asymptotic_skew_coefficient, hybrid_cubic, hybrid_roots, skew_term_structure
from .linear import second_moment, third_moment_closed
from .nonlinear import nonlinear_term_structure
from .simulate import scenario_run, simulate_term_structure
from .spectral import cumulants_from_mgf, eigen_summary, gamma_matrix, trace_moments

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class Run:
    """Collects outputs of one command and writes its manifest."""

    def __init__(self, command: str, out: Path):
        self.command = command
        self.out = out
        self.outputs: list[str] = []
        self.seeds: list[int] = []
        self.overrides: dict = {}
        self.t0 = time.monotonic()
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def write_json(self, name: str, obj) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self, resolved: dict) -> Path:
        manifest = {
            "command": self.command,
            "config": resolved,
            "overrides": self.overrides,
            "version": __version__,
            "seeds": self.seeds,
            "outputs": self.outputs,
            "finished_at": dt.datetime.now(dt.timezone.utc).isoformat(),
            "wall_clock_seconds": time.monotonic() - self.t0,
        }
        p = self.out / f"manifest_{self.command}.json"
        with open(p, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p


def _int_key(cfg, key, default, minimum=1):
    v = _num(cfg, key, "", default, integer=True, minimum=minimum)
    return v


def _resolve_prices(cfg: dict, base: Path) -> tuple[dict, PriceSeries]:
    if "prices" in cfg:
        p = Path(cfg["prices"])
        p = p if p.is_absolute() else base / p
        if not p.exists():
            raise DataError(f"price file not found: {p}")
        return {"prices": str(p)}, load_prices(p)
    if "path" in cfg:
        if not isinstance(cfg["path"], list):
            raise ConfigError("'path' must be a list of prices")
        return {"path": cfg["path"]}, PriceSeries.from_values(cfg["path"], meta="inline")
    if "trend" in cfg:
        t = cfg["trend"]
        _check_keys(t, "trend", {"knots"}, {"knots"})
        knots = np.asarray(t["knots"], dtype=float)
        if knots.ndim != 2 or knots.shape[1] != 2 or np.any(np.diff(knots[:, 0]) <= 0):
            raise ConfigError("'trend.knots' must be [[day, price], ...] with increasing days")
        days = np.arange(int(knots[-1, 0]) + 1)
        return {"trend": {"knots": knots.tolist()}}, PriceSeries.from_values(
            np.interp(days, knots[:, 0], knots[:, 1]), meta="trend")
    raise ConfigError("one of 'prices', 'path' or 'trend' is required")


# ---------------------------------------------------------------------------
# commands; each returns the resolved config


def cmd_skew_linear(cfg, run: Run, **_):
    _check_keys(cfg, "", {"filter", "Pmax"}, {"filter"})
    fcfg, f = resolve_filter(cfg["filter"])
    Pmax = _int_key(cfg, "Pmax", 200)
    skew_term_structure(f, Pmax).write_csv(run.path("skew_linear.csv"))
    return {"filter": fcfg, "Pmax": Pmax}


def cmd_skew_nonlinear(cfg, run: Run, **_):
    _check_keys(cfg, "", {"filter", "activation", "Pmax"}, {"filter"})
    fcfg, f = resolve_filter(cfg["filter"])
    acfg, spec = resolve_activation(cfg.get("activation"))
    Pmax = _int_key(cfg, "Pmax", 200)
    nonlinear_term_structure(f, spec, Pmax).write_csv(run.path("skew_nonlinear.csv"))
    return {"filter": fcfg, "activation": acfg, "Pmax": Pmax}


def cmd_hybrid(cfg, run: Run, **_):
    """Fast/slow crossover mix: ``periods = [fast_a, fast_b, slow_a, slow_b]``."""
    _check_keys(cfg, "", {"periods", "fast", "slow"})
    resolved = {}
    if "periods" in cfg:
        per = cfg["periods"]
        if not isinstance(per, list) or len(per) not in (2, 4):
            raise ConfigError("'periods' must list 4 periods (fast pair, slow pair) or 2 (slow only)")
        per = [_num({"p": p}, "p", f"periods[{i}]") for i, p in enumerate(per)]
        resolved["periods"] = per
        fast = make_crossover(per[0], per[1]) if len(per) == 4 else None
        slow = make_crossover(per[-2], per[-1])
    else:
        if "slow" not in cfg:
            raise ConfigError("missing required config key 'slow' (or give 'periods')")
        resolved["slow"], slow = resolve_filter(cfg["slow"], "slow")
        fast = None
        if "fast" in cfg:
            resolved["fast"], fast = resolve_filter(cfg["fast"], "fast")
    if fast is None:
        c = asymptotic_skew_coefficient(slow)
        report = {"components": ["slow"], "asymptotic_skew_coefficient": c,
                  "constraint": "lamS > 0" if c > 0 else "lamS < 0",
                  "note": "single component: positive asymptotic skew for any positive multiplier"
                  if c > 0 else "single component: negative asymptotic skew for positive multiplier"}
    else:
        h = hybrid_roots(fast, slow)
        report = {
            "components": ["fast", "slow"],
            "coefficients": list(h.coefficients),
            "roots": [[r.real, r.imag] for r in h.roots],
            "zeta_real": h.zeta_real,
            "constraint": h.describe(),
            "inequality": list(h.inequality) if h.inequality else None,
            "check_lamF1_lamS0": hybrid_cubic(1.0, 0.0, fast, slow),
        }
    run.write_json("hybrid.json", report)
    return resolved


def cmd_simulate(cfg, run: Run, seed=None, workers=None, **_):
    _check_keys(cfg, "", {"filter", "activation", "sim"}, {"filter"})
    fcfg, f = resolve_filter(cfg["filter"])
    acfg, spec = resolve_activation(cfg.get("activation"))
    scfg, sim = resolve_sim(cfg.get("sim"), seed=seed, workers=workers)
    run.seeds.append(sim.seed)
    ts = simulate_term_structure(sim, f, spec)
    ts.write_csv(run.path("simulate.csv"))
    if ts.flags:
        run.write_json("simulate_flags.json", ts.flags)
    return {"filter": fcfg, "activation": acfg, "sim": scfg}


def cmd_backtest(cfg, run: Run, base=Path("."), seed=None, **_):
    _check_keys(cfg, "", {"prices", "path", "trend", "filter", "activation", "N_vol", "burn_in",
                          "Pmax", "mode", "window", "summary_P", "returns"}, {"filter"})
    pcfg, prices = _resolve_prices(cfg, base)
    fcfg, f = resolve_filter(cfg["filter"])
    acfg, spec = resolve_activation(cfg.get("activation"))
    N_vol = _num(cfg, "N_vol", "", 20, minimum=1)
    burn = _int_key(cfg, "burn_in", 0, minimum=0)
    Pmax = _int_key(cfg, "Pmax", 200)
    mode = cfg.get("mode", "central")
    window = cfg.get("window", "overlapping")
    returns = cfg.get("returns", "absolute")
    summary_P = cfg.get("summary_P", [1, 20, 100])
    if not isinstance(summary_P, list):
        raise ConfigError("'summary_P' must be a list of integers")
    res = run_strategy(prices, f, spec, N_vol, burn_in=burn, returns=returns)
    pnl = res.pnl_series()
    ts = empirical_term_structure(pnl, Pmax, mode, window, seed=seed or 0)
    ts.write_csv(run.path("backtest_term_structure.csv"))
    with open(run.path("backtest_pnl.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "position", "pnl"])
        for i in range(res.first_pnl_index, len(prices)):
            w.writerow([str(prices.dates[i]), repr(float(res.signal_position[i - 1])),
                        repr(float(res.pnl[i]))])
    summaries = []
    for P in summary_P:
        P = _num({"P": P}, "P", "summary_P", integer=True, minimum=1)
        if len(pnl) >= P:
            s = performance_summary(pnl, P)
            summaries.append({"P": P, "sharpe": s.sharpe, "kappa3": s.kappa3,
                              "win_fraction": s.win_fraction, "gram_charlier": s.gram_charlier,
                              "n_windows": s.n_windows, "flags": list(s.flags)})
    run.write_json("backtest_summary.json", {"summaries": summaries,
                                             "flags": res.flags + ts.flags})
    return {**pcfg, "filter": fcfg, "activation": acfg, "N_vol": N_vol, "burn_in": burn,
            "Pmax": Pmax, "mode": mode, "window": window, "summary_P": summary_P,
            "returns": returns}


def cmd_spectral(cfg, run: Run, **_):
    _check_keys(cfg, "", {"filter", "P", "tol", "cumulants"}, {"filter", "P"})
    fcfg, f = resolve_filter(cfg["filter"])
    P = _int_key(cfg, "P", None)
    tol = _num(cfg, "tol", "", 1e-12)
    want_cum = cfg.get("cumulants", True)
    g = gamma_matrix(f, P, tol)
    m1, m2, m3 = trace_moments(g)
    es = eigen_summary(g)
    report = {"P": P, "L": g.L, "tol": tol,
              "trace": m1, "m2_trace": m2, "m3_trace": m3,
              "m2_closed": float(second_moment(f, P)), "m3_closed": third_moment_closed(f, P),
              "eigen": es.as_record()}
    if want_cum:
        k1, k2, k3 = cumulants_from_mgf(f, P)
        report["cumulants_mgf"] = {"k1": k1, "k2": k2, "k3": k3}
    run.write_json("spectral.json", report)
    with open(run.path("spectral_eigenvalues.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "eigenvalue"])
        for i, v in enumerate(es.eigenvalues):
            w.writerow([i, repr(float(v))])
    return {"filter": fcfg, "P": P, "tol": tol, "cumulants": want_cum}


def cmd_scenario(cfg, run: Run, base=Path("."), **_):
    _check_keys(cfg, "", {"prices", "path", "trend", "filter", "activations", "N_vol"},
                {"filter"})
    pcfg, prices = _resolve_prices(cfg, base)
    fcfg, f = resolve_filter(cfg["filter"])
    acts = cfg.get("activations", [{"type": "linear"}])
    if not isinstance(acts, list) or not acts:
        raise ConfigError("'activations' must be a non-empty list")
    N_vol = _num(cfg, "N_vol", "", 20, minimum=1)
    resolved_acts, curves = [], []
    for i, a in enumerate(acts):
        acfg, spec = resolve_activation(a, f"activations[{i}]")
        resolved_acts.append(acfg)
        curves.append(scenario_run(prices, f, spec, N_vol).cumulative_pnl)
    with open(run.path("scenario.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "price"] + [f"cum_pnl_{i}" for i in range(len(curves))])
        for j in range(len(prices)):
            w.writerow([str(prices.dates[j]), repr(float(prices.prices[j]))]
                       + [repr(float(c[j])) for c in curves])
    run.write_json("scenario_final.json", {
        "activations": resolved_acts,
        "final_cumulative_pnl": [float(c[-1]) for c in curves]})
    return {**pcfg, "filter": fcfg, "activations": resolved_acts, "N_vol": N_vol}


COMMANDS = {
    "skew-linear": (cmd_skew_linear, "skewness term structure of a linear filter"),
    "skew-nonlinear": (cmd_skew_nonlinear, "skewness term structure with an activation function"),
    "hybrid": (cmd_hybrid, "positivity constraint for fast/slow multipliers"),
    "simulate": (cmd_simulate, "Monte Carlo term structure with standard errors"),
    "backtest": (cmd_backtest, "empirical term structure and summary from a price file"),
    "spectral": (cmd_spectral, "quadratic-form eigen summary and MGF cumulants"),
    "scenario": (cmd_scenario, "compare activations on a deterministic price path"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="momskew", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"momskew {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--workers", type=int, default=None,
                        help="parallel worker processes (simulate only)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = load_config(args.config)
        run = Run(args.command.replace("-", "_"), Path(args.out))
        if args.seed is not None:
            run.overrides["seed"] = args.seed
        if args.workers is not None:
            run.overrides["workers"] = args.workers
        resolved = func(cfg, run, base=Path(args.config).parent, seed=args.seed,
                        workers=args.workers)
        run.finish(resolved)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, PoleError, SPRZError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
