import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import direct_weights, ema_filters, sprz_filters, truncated_autocov
from momskew.errors import InvalidPeriodError, PoleError, SPRZError
from momskew.filters import (
    ContinuousKernel,
    LinearFilter,
    apply_filter,
    autocovariance,
    combine,
    derivative_square_norm,
    make_crossover,
    make_ema1,
    make_ema2,
    path_length_class,
    require_sprz,
    sprz_check,
    square_norm,
    system_value,
    value_at_origin,
    variational_residual,
    weight,
)


class TestEma1:
    def test_unit_period_has_no_weights(self):
        f = make_ema1(1)
        assert np.all(f.weights(10) == 0)
        assert autocovariance(f, 0) == 0

    def test_normalized_autocovariance_is_geometric(self):
        f = make_ema1(20, normalized=True)
        k = np.arange(0, 50)
        np.testing.assert_allclose(autocovariance(f, k), 0.95 ** k, rtol=1e-13)
        assert autocovariance(f, 0) == pytest.approx(1, abs=1e-12)

    def test_unnormalized_lag0_vs_truncated_sum(self):
        f = make_ema1(20)
        a = 0.95
        w = a ** (np.arange(2000) + 1)
        assert autocovariance(f, 0) == pytest.approx(a * a / (1 - a * a), rel=1e-13)
        assert autocovariance(f, 0) == pytest.approx(np.dot(w, w), rel=1e-12)
        assert autocovariance(f, 0) == pytest.approx(9.256410256410254, rel=1e-13)

    def test_weight_value(self):
        assert weight(make_ema1(20), 3) == pytest.approx(0.81450625, rel=1e-14)

    def test_rejects_short_period(self):
        with pytest.raises(InvalidPeriodError):
            make_ema1(0.5)


class TestEma2:
    def test_unit_fast_period_recovers_ema1_shape(self):
        f, g = make_ema2(1, 15), make_ema1(15)
        wf, wg = f.weights(60), g.weights(60)
        ratio = wf / wg
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)

    def test_coalesced_normalized(self):
        f = make_ema2(20, 20, normalized=True)
        assert f.coalesced == pytest.approx(0.95)
        assert autocovariance(f, 0) == pytest.approx(1, abs=1e-12)
        j = np.arange(40)
        w = f.weights(40)
        np.testing.assert_allclose(w / w[0], (j + 1) * 0.95 ** j, rtol=1e-12)

    def test_lag1_vs_truncated_sum(self):
        f = make_ema2(20, 40, normalized=True)
        w = f.weights(3000)
        assert autocovariance(f, 1) == pytest.approx(truncated_autocov(w, 1), abs=1e-10)

    def test_normalized_autocovariance_formula(self):
        a, b = 0.95, 0.975
        f = make_ema2(20, 40, normalized=True)
        k = np.arange(30)
        expect = ((a ** (k + 1) * (1 - b * b) - b ** (k + 1) * (1 - a * a))
                  / ((a - b) * (1 + a * b)))
        np.testing.assert_allclose(autocovariance(f, k), expect, rtol=1e-11)

    def test_weights_match_definition(self):
        a, b = 0.95, 0.975
        j = np.arange(50)
        np.testing.assert_allclose(make_ema2(20, 40).weights(50),
                                   (a ** (j + 1) - b ** (j + 1)) / (a - b), rtol=1e-12)

    def test_near_coincident_rejected(self):
        with pytest.raises(PoleError):
            make_ema2(20, 20 + 1e-12)


class TestCombine:
    def test_identity(self):
        f = make_ema2(5, 10)
        assert combine([f], [1.0]) is f

    def test_hybrid_weight_oracle(self):
        lf, ls = 0.7, -0.3
        f = combine([make_ema2(5, 10), make_ema2(20, 40)], [lf, ls])
        assert f.n_poles == 4
        aF, bF, aS, bS = 0.8, 0.9, 0.95, 0.975
        j = 5
        expect = (lf * (aF ** 6 - bF ** 6) / (aF - bF)
                  + ls * (aS ** 6 - bS ** 6) / (aS - bS))
        assert weight(f, j) == pytest.approx(expect, rel=1e-13)

    def test_coincident_poles_rejected(self):
        with pytest.raises(PoleError):
            combine([make_ema1(10), make_ema1(10)], [1, 1])

    def test_merge_opt_in(self):
        f = combine([make_ema1(10), make_ema1(10)], [1, 1], merge=True)
        np.testing.assert_allclose(f.weights(20), 2 * make_ema1(10).weights(20), rtol=1e-14)

    def test_near_coincident_rejected_even_with_merge(self):
        g = LinearFilter((0.9 + 1e-12,), (0.81,), a0=0.9)
        with pytest.raises(PoleError):
            combine([make_ema1(10), g], [1, 1], merge=True)


class TestSystemValue:
    def test_ema1_at_inverse_pole(self):
        a = 0.95
        assert system_value(make_ema1(20), 1 / a).real == pytest.approx(a / (1 - a * a), rel=1e-13)

    def test_ema1_regular_at_origin(self):
        assert value_at_origin(make_ema1(20)) == pytest.approx(0, abs=1e-15)
        assert value_at_origin(make_ema2(20, 40)) == pytest.approx(0, abs=1e-12)

    def test_series_oracle(self):
        f = make_ema2(20, 40)
        w = f.weights(4000)
        series = np.sum(w * 2.0 ** -np.arange(4000))
        assert system_value(f, 2).real == pytest.approx(series, rel=1e-12)

    def test_at_pole_raises(self):
        with pytest.raises(PoleError):
            system_value(make_ema1(20), 0.95)


class TestSprz:
    def test_ema_pass(self):
        assert sprz_check(make_ema1(20)).passed
        assert sprz_check(make_ema2(20, 40)).passed

    def test_outside_unit_circle_fails(self):
        f = LinearFilter((1.01,), (1.0,), a0=0.0)
        rep = sprz_check(f)
        assert not rep.passed and not rep.inside_unit_circle
        with pytest.raises(SPRZError):
            require_sprz(f)

    def test_origin_residue_mismatch_flag(self):
        # a0 != 0 and A(0) != 0: residue A(0)*a0 differs from A(0)^2
        f = LinearFilter((0.5,), (1.0,), a0=1.0)
        rep = sprz_check(f)
        assert rep.origin_residue_mismatch
        assert not sprz_check(make_ema1(20)).origin_residue_mismatch


@given(sprz_filters())
def test_autocovariance_matches_truncated_sum(f):
    n = int(math.log(1e-17) / math.log(f.max_pole_modulus)) + 50
    w = direct_weights(f, n)
    r0 = truncated_autocov(w, 0)
    for k in (0, 1, 3, 10):
        assert autocovariance(f, k) == pytest.approx(truncated_autocov(w, k), rel=1e-9, abs=1e-12 * r0)


@given(sprz_filters())
def test_weights_from_recursion(f):
    w = direct_weights(f, 60)
    np.testing.assert_allclose(f.weights(60), w, rtol=1e-9, atol=1e-12 * np.max(np.abs(w)))


@given(ema_filters(), st.integers(0, 300))
def test_cauchy_schwarz(f, k):
    assert abs(autocovariance(f, k)) <= autocovariance(f, 0) * (1 + 1e-12)


@given(sprz_filters(), st.integers(0, 400))
def test_geometric_decay(f, j):
    m = f.max_pole_modulus
    C = abs(f.gain) * (abs(f.a0) + sum(abs(r) for r in f.residues) / m)
    assert abs(weight(f, j)) <= C * m ** j * (1 + 1e-9) + 1e-300


@given(ema_filters(), st.floats(-3, 3))
def test_scaling_is_quadratic_in_autocov(f, c):
    g = f.scaled(c)
    assert autocovariance(g, 2) == pytest.approx(c * c * autocovariance(f, 2), rel=1e-12, abs=1e-300)


def test_apply_filter_is_causal_convolution(rng):
    f = make_ema2(5, 12)
    u = rng.standard_normal(300)
    v = apply_filter(f, u)
    w = f.weights(300)
    np.testing.assert_allclose(v, np.convolve(u, w)[:300], rtol=1e-10, atol=1e-12)


def test_crossover_is_scaled_ema2():
    x = make_crossover(5, 10)
    np.testing.assert_allclose(x.weights(30), 0.1 * make_ema2(5, 10).weights(30), rtol=1e-13)
    np.testing.assert_allclose(x.weights(30), make_ema1(10).weights(30) - make_ema1(5).weights(30),
                               rtol=1e-12, atol=1e-15)


class TestContinuousKernels:
    def test_ema1_square_norm(self):
        assert square_norm(ContinuousKernel("ema1", 0.5)) == 1.0

    def test_ema2_limit(self):
        for eps in (1e-2, 1e-3, 1e-4):
            v = square_norm(ContinuousKernel("ema2", 1.0, 1.0 + eps)) / eps ** 2
            assert v == pytest.approx(0.25, rel=3 * eps)
        assert square_norm(ContinuousKernel("ema2eq", 1.0)) == 0.25

    def test_ema2_quadrature(self):
        k = ContinuousKernel("ema2", 1.0, 2.0)
        q = quad(lambda t: (math.exp(-t) - math.exp(-2 * t)) ** 2, 0, np.inf)[0]
        assert square_norm(k) == pytest.approx(1 / 12, rel=1e-14)
        assert q == pytest.approx(1 / 12, rel=1e-10)

    @pytest.mark.parametrize("kind,a,b", [("ema1", 0.7, None), ("ema2", 0.3, 1.1), ("ema2eq", 1.0, None),
                                          ("ema2eq", 0.4, None)])
    def test_derivative_norm_quadrature(self, kind, a, b):
        k = ContinuousKernel(kind, a, b)
        q = quad(lambda t: float(k.derivative(t)) ** 2, 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]
        assert derivative_square_norm(k) == pytest.approx(q, abs=1e-10)
        q0 = quad(lambda t: float(k(t)) ** 2, 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]
        assert square_norm(k) == pytest.approx(q0, abs=1e-10)

    def test_path_length(self):
        assert not path_length_class(ContinuousKernel("ema1", 1.0)).finite
        pl = path_length_class(ContinuousKernel("ema2", 1.0, 2.0))
        assert pl.finite and pl.rate == pytest.approx(math.sqrt(2 * (1 / 6) / math.pi))
        assert path_length_class(ContinuousKernel("ema2eq", 1.0)).finite

    def test_invalid(self):
        with pytest.raises(ValueError):
            ContinuousKernel("ema2", 2.0, 1.0)
        with pytest.raises(ValueError):
            ContinuousKernel("ema1", -1.0)

    @given(st.floats(0.05, 5), st.floats(0.01, 20))
    def test_variational_kernel_solves_ode(self, a, t):
        assert abs(variational_residual(a, t)) < 1e-12 * max(1.0, a * a * t)
