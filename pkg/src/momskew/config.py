"""JSON config schema shared by the command-line tools.

Each ``resolve_*`` function checks keys, fills defaults and returns a plain
dict (the resolved config, which is what gets written to the manifest) and
the objects it describes.  Unknown keys raise ``ConfigError`` naming the key
by its dotted path.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import ConfigError
from .filters import LinearFilter, combine, make_crossover, make_ema1, make_ema2, normalize
from .nonlinear import (
    Activation,
    DoubleStep,
    Linear,
    RevertingSigmoid,
    SimpleSigmoid,
    compound_sigmoid_make,
)
from .simulate import SimConfig


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def _check_keys(d: Any, where: str, allowed: set[str], required: set[str] = frozenset()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where or 'config'}: expected an object, got {type(d).__name__}")
    for k in d:
        if k not in allowed:
            raise ConfigError(f"unknown config key '{_join(where, k)}'")
    for k in required:
        if k not in d:
            raise ConfigError(f"missing required config key '{_join(where, k)}'")


def _join(where, k):
    return f"{where}.{k}" if where else k


def _num(d, key, where, default=None, *, integer=False, minimum=None):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{_join(where, key)}' must be a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"'{_join(where, key)}' must be an integer, got {v!r}")
        v = int(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f"'{_join(where, key)}' must be >= {minimum}, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# filters

_FILTER_KEYS = {
    "ema1": ({"type", "N", "normalized"}, {"N"}),
    "ema2": ({"type", "N_alpha", "N_beta", "normalized"}, {"N_alpha", "N_beta"}),
    "crossover": ({"type", "N_alpha", "N_beta", "normalized"}, {"N_alpha", "N_beta"}),
    "combine": ({"type", "components", "weights", "normalized"}, {"components", "weights"}),
}


def resolve_filter(d: Any, where: str = "filter") -> tuple[dict, LinearFilter]:
    _check_keys(d, where, {"type", "N", "N_alpha", "N_beta", "normalized", "components", "weights"},
                {"type"})
    kind = d["type"]
    if kind not in _FILTER_KEYS:
        raise ConfigError(f"'{where}.type' must be one of {sorted(_FILTER_KEYS)}, got {kind!r}")
    allowed, required = _FILTER_KEYS[kind]
    _check_keys(d, where, allowed, required)
    norm = d.get("normalized", False)
    if not isinstance(norm, bool):
        raise ConfigError(f"'{where}.normalized' must be true or false")
    if kind == "ema1":
        N = _num(d, "N", where)
        return {"type": kind, "N": N, "normalized": norm}, make_ema1(N, normalized=norm)
    if kind in ("ema2", "crossover"):
        Na, Nb = _num(d, "N_alpha", where), _num(d, "N_beta", where)
        out = {"type": kind, "N_alpha": Na, "N_beta": Nb, "normalized": norm}
        if kind == "ema2":
            return out, make_ema2(Na, Nb, normalized=norm)
        f = make_crossover(Na, Nb)
        return out, _maybe_normalize(f, norm)
    comps, weights = d["components"], d["weights"]
    if not isinstance(comps, list) or not isinstance(weights, list) or len(comps) != len(weights):
        raise ConfigError(f"'{where}.components' and '{where}.weights' must be lists of equal length")
    resolved, filters = [], []
    for i, c in enumerate(comps):
        r, f = resolve_filter(c, f"{where}.components[{i}]")
        resolved.append(r)
        filters.append(f)
    w = [_num({"w": x}, "w", f"{where}.weights[{i}]") for i, x in enumerate(weights)]
    f = _maybe_normalize(combine(filters, w), norm)
    return {"type": kind, "components": resolved, "weights": w, "normalized": norm}, f


def _maybe_normalize(f, norm):
    return normalize(f) if norm else f


# ---------------------------------------------------------------------------
# activations

_ACT_KEYS = {
    "linear": (set(), set()),
    "sigmoid": ({"lambda"}, {"lambda"}),
    "reverting": ({"lambda"}, {"lambda"}),
    "double_step": ({"epsilon"}, {"epsilon"}),
    "compound": ({"lambda", "ratio"}, {"lambda", "ratio"}),
}


def resolve_activation(d: Any, where: str = "activation") -> tuple[dict, Activation]:
    if d is None:
        return {"type": "linear"}, Linear()
    _check_keys(d, where, {"type", "lambda", "epsilon", "ratio"}, {"type"})
    kind = d["type"]
    if kind not in _ACT_KEYS:
        raise ConfigError(f"'{where}.type' must be one of {sorted(_ACT_KEYS)}, got {kind!r}")
    extra, required = _ACT_KEYS[kind]
    _check_keys(d, where, {"type"} | extra, {"type"} | required)
    if kind == "linear":
        return {"type": kind}, Linear()
    if kind == "sigmoid":
        lam = _num(d, "lambda", where)
        return {"type": kind, "lambda": lam}, SimpleSigmoid(lam)
    if kind == "reverting":
        lam = _num(d, "lambda", where)
        return {"type": kind, "lambda": lam}, RevertingSigmoid(lam)
    if kind == "double_step":
        eps = _num(d, "epsilon", where)
        return {"type": kind, "epsilon": eps}, DoubleStep(eps)
    lam = _num(d, "lambda", where)
    ratio = d["ratio"]
    if ratio == "inf":
        ratio = math.inf
    ratio = _num({"ratio": ratio}, "ratio", where)
    return ({"type": kind, "lambda": lam, "ratio": "inf" if math.isinf(ratio) else ratio},
            compound_sigmoid_make(ratio, lam))


# ---------------------------------------------------------------------------
# simulation

_SIM_KEYS = {"seed", "n_paths", "horizon", "burn_in", "distribution", "df", "Pmax",
             "periods", "n_boot"}


def resolve_sim(d: Any, where: str = "sim", seed=None, workers=None) -> tuple[dict, SimConfig]:
    d = dict(d or {})
    _check_keys(d, where, _SIM_KEYS)
    if seed is not None:
        d["seed"] = seed
    kw = {}
    for key in ("seed", "n_paths", "horizon", "burn_in", "Pmax", "n_boot"):
        if key in d:
            kw[key] = _num(d, key, where, integer=True, minimum=0)
    if "df" in d:
        kw["df"] = _num(d, "df", where)
    if "distribution" in d:
        kw["distribution"] = d["distribution"]
    if "periods" in d and d["periods"] is not None:
        if not isinstance(d["periods"], list):
            raise ConfigError(f"'{where}.periods' must be a list of integers")
        kw["periods"] = tuple(_num({"p": p}, "p", f"{where}.periods[{i}]", integer=True, minimum=1)
                              for i, p in enumerate(d["periods"]))
    if workers is not None:
        kw["workers"] = workers
    cfg = SimConfig(**kw)
    out = cfg.to_dict()
    out.pop("workers")
    out["periods"] = list(cfg.periods) if cfg.periods is not None else None
    return out, cfg
