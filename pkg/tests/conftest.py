import cmath

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from momskew.filters import LinearFilter, make_ema1, make_ema2

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_sprz_filter(rng: np.random.Generator) -> LinearFilter:
    """Random real poles plus conjugate pairs, separated by at least 1e-3."""
    n_real = int(rng.integers(0, 4))
    n_pair = int(rng.integers(0 if n_real else 1, 3))
    poles, res = [], []
    while len(poles) < n_real:
        p = rng.uniform(0.05, 0.99) * rng.choice([1, 1, 1, -1])
        if all(abs(p - q) > 1e-3 for q in poles):
            poles.append(p)
            res.append(rng.normal())
    for _ in range(n_pair):
        p = rng.uniform(0.2, 0.98) * cmath.exp(1j * rng.uniform(0.05, 3.0))
        r = complex(rng.normal(), rng.normal())
        poles += [p, p.conjugate()]
        res += [r, r.conjugate()]
    return LinearFilter(tuple(poles), tuple(res), a0=rng.normal(), label="random")


@st.composite
def sprz_filters(draw):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_sprz_filter(np.random.default_rng(seed))


@st.composite
def ema_filters(draw, normalized=None):
    norm = draw(st.booleans()) if normalized is None else normalized
    kind = draw(st.sampled_from(["ema1", "ema2", "ema2eq"]))
    Na = draw(st.floats(1.5, 80))
    if kind == "ema1":
        return make_ema1(Na, normalized=norm)
    if kind == "ema2eq":
        return make_ema2(Na, Na, normalized=norm)
    Nb = draw(st.floats(1.5, 80).filter(lambda x: abs(x - Na) > 0.5))
    return make_ema2(Na, Nb, normalized=norm)


def direct_weights(f: LinearFilter, n: int) -> np.ndarray:
    """Impulse response by running the recursive filter on a unit spike."""
    from momskew.filters import apply_filter
    e = np.zeros(n)
    e[0] = 1.0
    return apply_filter(f, e)


def truncated_autocov(w: np.ndarray, k: int) -> float:
    return float(np.dot(w[: len(w) - k], w[k:]))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
