import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import direct_weights, ema_filters, random_sprz_filter, sprz_filters
from momskew.cubic import solve_cubic
from momskew.errors import NumericalError, SPRZError
from momskew.filters import (
    LinearFilter,
    autocovariance,
    combine,
    make_crossover,
    make_ema1,
    make_ema2,
)
from momskew.linear import (
    asymptotic_skew_coefficient,
    ema1_skew_continuum,
    ema1_skew_exact,
    ema2_moments_exact,
    hybrid_cubic,
    hybrid_roots,
    second_moment,
    skew_term_structure,
    third_moment_closed,
    third_moment_direct,
)
from momskew.termstructure import MomentTermStructure


def mu3_from_weights(w: np.ndarray, P: int) -> float:
    """Independent oracle: truncated weights, autocovariances by dot products."""
    k = np.arange(1, P)
    R = np.array([np.dot(w[: len(w) - j], w[j:]) for j in k])
    return float(6 * np.sum((P - k) * w[k - 1] * R))


class TestSecondMoment:
    def test_ema1_single_period(self):
        a = 0.95
        assert second_moment(make_ema1(20), 1) == pytest.approx(a * a / (1 - a * a), rel=1e-13)

    def test_normalized(self):
        assert second_moment(make_ema2(20, 40, normalized=True), 250) == pytest.approx(250, rel=1e-12)

    def test_hybrid_truncated(self):
        f = combine([make_ema2(5, 10), make_ema2(20, 40)], [0.6, 0.4])
        w = direct_weights(f, 3000)
        assert second_moment(f, 10) == pytest.approx(10 * np.dot(w, w), rel=1e-10)


class TestThirdMoment:
    @pytest.mark.parametrize("f", [make_ema1(20), make_ema2(20, 40), make_ema2(1, 20)])
    def test_zero_at_one_period(self, f):
        assert third_moment_direct(f, 1) == 0.0
        assert third_moment_closed(f, 1) == 0.0

    def test_ema1_positive(self):
        f = make_ema1(7)
        assert all(third_moment_direct(f, P) > 0 for P in range(2, 60))

    def test_ema1_frozen_and_exact_skew(self):
        f = make_ema1(20)
        mu3 = third_moment_closed(f, 22)
        assert mu3 == pytest.approx(6589.137084043471, rel=1e-12)
        assert mu3 / second_moment(f, 22) ** 1.5 == pytest.approx(ema1_skew_exact(20, 22), rel=1e-12)

    def test_ema2_vs_oracles(self):
        f = make_ema2(20, 40)
        closed = third_moment_closed(f, 100)
        assert closed == pytest.approx(third_moment_direct(f, 100), rel=1e-11)
        assert closed == pytest.approx(mu3_from_weights(direct_weights(f, 3000), 100), rel=1e-9)
        assert closed == pytest.approx(838732579.9493306, rel=1e-12)

    def test_coalesced_vs_weight_oracle(self):
        f = make_ema2(20, 20)
        for P in (2, 7, 50, 300):
            assert third_moment_closed(f, P) == pytest.approx(
                mu3_from_weights(direct_weights(f, 3000), P), rel=1e-9)
        assert third_moment_closed(f, 50) == pytest.approx(65450875.862411484, rel=1e-12)

    def test_counter_trend_hybrid(self):
        # short-term counter-trend, long-term trend: negative early, positive late
        f = combine([make_crossover(5, 10), make_crossover(20, 40)], [-1.0, 1.0])
        c, d = third_moment_closed(f, 5), third_moment_direct(f, 5)
        assert c == pytest.approx(d, rel=1e-10)
        assert c < 0
        assert third_moment_closed(f, 200) > 0
        assert asymptotic_skew_coefficient(f) > 0

    def test_vectorized(self):
        f = make_ema2(3, 9)
        P = np.arange(1, 40)
        np.testing.assert_allclose(third_moment_closed(f, P),
                                   [third_moment_direct(f, p) for p in P], rtol=1e-10)

    def test_sprz_required(self):
        with pytest.raises(SPRZError):
            third_moment_closed(LinearFilter((1.01,), (1.0,)), 5)

    def test_bad_period(self):
        with pytest.raises(ValueError):
            third_moment_direct(make_ema1(5), 0)


@given(sprz_filters(), st.sampled_from([1, 2, 5, 20, 100, 500]))
def test_closed_equals_direct(f, P):
    d = third_moment_direct(f, P)
    assert third_moment_closed(f, P) == pytest.approx(d, rel=1e-9, abs=1e-300)


@given(sprz_filters(), st.integers(1, 200))
def test_negation_is_exact_odd(f, P):
    assert third_moment_direct(-f, P) == -third_moment_direct(f, P)
    assert third_moment_closed(-f, P) == pytest.approx(-third_moment_closed(f, P), rel=1e-14, abs=1e-300)


@given(ema_filters(normalized=False), st.integers(2, 300))
def test_positive_weights_positive_skew(f, P):
    assert third_moment_closed(f, P) > 0


class TestAsymptotics:
    def test_ema1_coefficient(self):
        a = 0.95
        assert asymptotic_skew_coefficient(make_ema1(20)) == pytest.approx(
            6 * a / math.sqrt(1 - a * a), rel=1e-13)
        N = 2000
        assert asymptotic_skew_coefficient(make_ema1(N)) == pytest.approx(
            3 * math.sqrt(2) * math.sqrt(N), rel=1e-3)

    def test_ema2_coefficient_closed_form(self):
        a, b = 0.95, 0.975
        expect = (6 * (a + b) * math.sqrt(1 - a * b)
                  / math.sqrt((1 - a * a) * (1 - b * b) * (1 + a * b)))
        c = asymptotic_skew_coefficient(make_ema2(20, 40))
        assert c == pytest.approx(expect, rel=1e-12)
        assert c == pytest.approx(32.57247868245391, rel=1e-12)
        assert c == pytest.approx(3 * math.sqrt(2) * math.sqrt(60), rel=0.05)

    @given(sprz_filters())
    def test_tail_law(self, f):
        c = asymptotic_skew_coefficient(f)
        P = 100_000
        k3 = third_moment_closed(f, P) / second_moment(f, P) ** 1.5
        assert k3 * math.sqrt(P) == pytest.approx(c, rel=1e-2, abs=1e-2 * abs(c) + 1e-9)

    def test_coalesced_tail(self):
        f = make_ema2(15, 15)
        P = 100_000
        k3 = third_moment_closed(f, P) / second_moment(f, P) ** 1.5
        assert k3 * math.sqrt(P) == pytest.approx(asymptotic_skew_coefficient(f), rel=1e-2)


class TestEma1Skew:
    def test_zero_at_one(self):
        assert ema1_skew_exact(20, 1) == 0.0

    def test_consistency_with_closed(self):
        f = make_ema1(40)
        assert ema1_skew_exact(40, 40) == pytest.approx(
            third_moment_closed(f, 40) / second_moment(f, 40) ** 1.5, rel=1e-12)

    def test_exact_peak_frozen(self):
        P = np.arange(1, 200)
        k = ema1_skew_exact(20, P)
        assert P[np.argmax(k)] == 24
        assert k.max() == pytest.approx(2.269574441735808, rel=1e-12)
        assert 2.1 <= k.max() <= 2.4

    def test_continuum_peak(self):
        x = np.linspace(0.5, 2, 300001)
        k = ema1_skew_continuum(x)
        assert k.max() == pytest.approx(2.41, abs=5e-3)
        assert x[np.argmax(k)] == pytest.approx(1.07, abs=5e-3)

    def test_large_n_approaches_continuum(self):
        N = 5000
        P = np.array([1000, 5350, 12000])
        np.testing.assert_allclose(ema1_skew_exact(N, P), ema1_skew_continuum(P / N), rtol=2e-3)


class TestEma2Exact:
    def test_peak(self):
        ts = skew_term_structure(make_ema2(20, 40), 400)
        P, k = ts.peak()
        assert P == 103
        assert k == pytest.approx(2.09923856141115, rel=1e-12)

    @pytest.mark.parametrize("Na,Nb,P", [(10, 20, 50), (3, 17, 2), (20, 40, 333), (1.5, 2.5, 9)])
    def test_matches_filter(self, Na, Nb, P):
        f = make_ema2(Na, Nb)
        mu2, mu3 = ema2_moments_exact(Na, Nb, P)
        assert mu2 == pytest.approx(second_moment(f, P), rel=1e-12)
        assert mu3 == pytest.approx(third_moment_direct(f, P), rel=1e-9)

    def test_zero_at_one(self):
        assert ema2_moments_exact(10, 20, 1)[1] == 0.0

    def test_reduces_to_ema1(self):
        P = np.arange(2, 100)
        mu2, mu3 = ema2_moments_exact(1.0 + 1e-9, 30, P)
        np.testing.assert_allclose(mu3 / mu2 ** 1.5, ema1_skew_exact(30, P), rtol=1e-6)

    def test_coalesced_fallback(self):
        mu2, mu3 = ema2_moments_exact(12, 12, 30)
        assert mu3 == pytest.approx(third_moment_direct(make_ema2(12, 12), 30), rel=1e-10)


class TestTermStructure:
    def test_shape(self):
        ts = skew_term_structure(make_ema1(20), 200)
        assert ts.kappa3[0] == 0
        d = np.diff(ts.kappa3)
        P_peak = ts.peak()[0]
        assert np.all(d[: P_peak - 1] > 0) and np.all(d[P_peak - 1:] < 0)

    def test_negation(self):
        f = make_ema2(20, 40)
        a, b = skew_term_structure(f, 80), skew_term_structure(-f, 80)
        np.testing.assert_allclose(b.kappa3, -a.kappa3, rtol=1e-13)

    def test_matches_direct(self):
        f = make_ema2(20, 40)
        ts = skew_term_structure(f, 300)
        direct = np.array([third_moment_direct(f, P) for P in range(1, 301)])
        np.testing.assert_allclose(ts.mu3, direct, rtol=1e-9)

    def test_csv_round_trip(self, tmp_path):
        ts = skew_term_structure(make_ema2(7, 13), 50)
        ts.write_csv(tmp_path / "t.csv")
        back = MomentTermStructure.read_csv(tmp_path / "t.csv")
        for col in ("periods", "mu2", "mu3", "kappa3"):
            assert np.array_equal(getattr(back, col), getattr(ts, col))

    def test_kappa_consistent(self):
        ts = skew_term_structure(make_ema2(4, 9), 60)
        np.testing.assert_allclose(ts.kappa3, ts.mu3 / ts.mu2 ** 1.5, rtol=1e-12)


class TestHybrid:
    fast, slow = make_crossover(5, 10), make_crossover(20, 40)

    def test_zeta(self):
        h = hybrid_roots(self.fast, self.slow)
        assert h.zeta_real == pytest.approx(-1.475937846764725, abs=1e-12)
        assert h.zeta_real == pytest.approx(-1.476, abs=1e-3)
        assert h.zeta_complex is not None
        assert h.describe() == "1*lamF + 1.4759*lamS > 0"
        assert hybrid_cubic(-h.zeta_real, -1.0, self.fast, self.slow) == pytest.approx(0, abs=1e-10)

    def test_root_of_cubic(self):
        h = hybrid_roots(self.fast, self.slow)
        c3, c2, c1, c0 = h.coefficients
        z = h.zeta_real
        assert abs(((c3 * z + c2) * z + c1) * z + c0) < 1e-10 * max(map(abs, h.coefficients))

    def test_pure_fast_positive(self):
        assert hybrid_cubic(1.0, 0.0, make_ema2(5, 10), make_ema2(20, 40)) > 0

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_homogeneous(self, lf, ls):
        v = hybrid_cubic(lf, ls, self.fast, self.slow)
        assert hybrid_cubic(2 * lf, 2 * ls, self.fast, self.slow) == pytest.approx(8 * v, rel=1e-12, abs=1e-12)

    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_sign_matches_constraint(self, lf, ls):
        h = hybrid_roots(self.fast, self.slow)
        margin = h.inequality[0] * lf + h.inequality[1] * ls
        if abs(margin) < 1e-3:
            return
        c = asymptotic_skew_coefficient(combine([self.fast, self.slow], [lf, ls]))
        assert (c > 0) == h.satisfied(lf, ls)

    def test_degenerate(self):
        with pytest.raises(NumericalError):
            hybrid_roots(LinearFilter(a0=1.0), self.slow)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 5))
def test_cubic_solver_roots(r1, r2, r3, c):
    coeffs = (c, -c * (r1 + r2 + r3), c * (r1 * r2 + r1 * r3 + r2 * r3), -c * r1 * r2 * r3)
    roots = solve_cubic(*coeffs)
    for r in roots:
        val = ((coeffs[0] * r + coeffs[1]) * r + coeffs[2]) * r + coeffs[3]
        assert abs(val) < 1e-7 * max(1.0, max(abs(x) for x in coeffs))


def test_cubic_solver_complex_pair():
    roots = solve_cubic(1.0, 0.0, 1.0, 1.0)
    assert roots[0].imag == 0
    assert roots[1] == pytest.approx(roots[2].conjugate())
    np.testing.assert_allclose(sorted(np.roots([1, 0, 1, 1]), key=lambda z: (z.imag != 0, -z.imag)),
                               roots, atol=1e-12)


def test_fifty_random_filters_fast():
    rng = np.random.default_rng(1)
    for _ in range(50):
        f = random_sprz_filter(rng)
        assert autocovariance(f, 0) > 0
