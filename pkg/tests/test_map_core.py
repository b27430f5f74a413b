import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from bimodalmap import (CriticalPointError, MapParams, NoFixedPoint, critical_points,
                        derivative, evaluate, extrema, fixed_point_multiplier, schwarzian,
                        symmetry_conjugate)

mp.mp.dps = 40


def mp_eval(b, k, x):
    x = mp.mpf(x)
    return mp.mpf(b) + x - mp.mpf(k) / (1 + mp.e ** x)


def test_eval_at_zero():
    assert evaluate(MapParams(-12, -30), 0.0) == 3.0


def test_eval_matches_extended_precision():
    for x in (-40.0, -5.0, -0.3, 0.0, 1.0, 5.0, 37.0):
        ref = float(mp_eval(-12, -30, x))
        assert evaluate(MapParams(-12, -30), x) == pytest.approx(ref, rel=1e-15, abs=1e-14)


def test_eval_limits_and_overflow():
    p = MapParams(-12, -30)
    xs = np.array([-700.0, -300.0, 300.0, 700.0])
    y = evaluate(p, xs)
    assert np.all(np.isfinite(y))
    assert y[0] - xs[0] == pytest.approx(p.b - p.k)
    assert y[-1] - xs[-1] == pytest.approx(p.b)


def test_params_reject_non_finite():
    with pytest.raises(ValueError):
        MapParams(float("nan"), -3.0)
    with pytest.raises(ValueError):
        MapParams(-1.0, float("inf"))


def test_derivative_examples():
    assert derivative(MapParams(-4, -8), 0.0, 1) == pytest.approx(-1.0, abs=1e-15)
    for k in (-30.0, -8.0, -1.0):
        assert derivative(MapParams(-1, k), 0.0, 2) == pytest.approx(0.0, abs=1e-15)


def test_derivative_order_validated():
    with pytest.raises(ValueError):
        derivative(MapParams(-1, -3), 0.0, 4)


def test_first_derivative_finite_difference():
    p = MapParams(-12, -30)
    h = 1e-6
    fd = (evaluate(p, 1 + h) - evaluate(p, 1 - h)) / (2 * h)
    assert derivative(p, 1.0, 1) == pytest.approx(fd, rel=1e-6)


def test_derivatives_against_mpmath(rng):
    # 100 random (p, x): analytic derivatives vs high-precision differentiation
    for _ in range(100):
        k = rng.uniform(-60, -0.5)
        b = rng.uniform(k, 0)
        x = rng.uniform(-20, 20)
        p = MapParams(b, k)
        for order in (1, 2, 3):
            ref = float(mp.diff(lambda t: mp_eval(b, k, t), x, order))
            assert derivative(p, x, order) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_derivatives_central_difference(rng):
    for _ in range(100):
        k = rng.uniform(-60, -0.5)
        p = MapParams(rng.uniform(k, 0), k)
        x = rng.uniform(-10, 10)
        h = 1e-5
        for order in (1, 2):
            fd = (derivative(p, x + h, order) - derivative(p, x - h, order)) / (2 * h)
            assert derivative(p, x, order + 1) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def _schwarzian_composed(p, x):
    d1, d2, d3 = (derivative(p, x, n) for n in (1, 2, 3))
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def test_schwarzian_closed_form_examples():
    p = MapParams(-12, -30)
    s0 = schwarzian(p, 0.0)
    assert s0 < 0
    assert s0 == pytest.approx(_schwarzian_composed(p, 0.0), rel=1e-12)
    # k = -4 makes x = 0 a (degenerate) critical point, so it is rejected
    with pytest.raises(CriticalPointError):
        schwarzian(MapParams(-1, -4), 0.0)


def test_schwarzian_negative_on_grid():
    p = MapParams(-12, -30)
    x_max, x_min = extrema(p.k)
    xs = np.linspace(-20, 20, 1000)
    xs = xs[(np.abs(xs - x_max) > 1e-6) & (np.abs(xs - x_min) > 1e-6)]
    assert all(schwarzian(p, x) < 0 for x in xs)


def test_schwarzian_rejects_critical_points():
    p = MapParams(-12, -30)
    with pytest.raises(CriticalPointError):
        schwarzian(p, extrema(p.k)[1])


def test_critical_points_examples():
    p = MapParams(-12, -30)
    cs = critical_points(p)
    assert cs.exists_extrema
    assert cs.x_min == pytest.approx(math.log(14 + 0.5 * math.sqrt(780)), rel=1e-14)
    assert cs.x_max == -cs.x_min
    assert cs.x_star == pytest.approx(math.log(1.5), rel=1e-14)
    # bisection oracles
    fprime = lambda x: float(derivative(p, x, 1))  # noqa: E731
    assert brentq(fprime, 0.1, 10, xtol=1e-15) == pytest.approx(cs.x_min, abs=1e-12)
    x_star = brentq(lambda x: float(evaluate(p, x)) - x, cs.x_max, cs.x_min, xtol=1e-15)
    assert x_star == pytest.approx(cs.x_star, abs=1e-12)
    assert abs(fprime(cs.x_max)) < 1e-12 and abs(fprime(cs.x_min)) < 1e-12


def test_critical_points_degenerate_and_monotone():
    assert extrema(-4.0) == (0.0, 0.0)
    cs = critical_points(MapParams(-1.0, -3.0))
    assert not cs.exists_extrema and cs.x_max is None
    with pytest.raises(NoFixedPoint):
        critical_points(MapParams(-3.0, -1.0))
    with pytest.raises(NoFixedPoint):
        critical_points(MapParams(0.0, -1.0))


def test_monotone_for_k_above_minus_four(rng):
    for _ in range(200):
        k = rng.uniform(-4, -1e-3)
        x = rng.uniform(-30, 30)
        assert derivative(MapParams(-0.5, k), x, 1) >= 1 + k / 4 - 1e-15


def test_symmetry_conjugate_examples():
    assert symmetry_conjugate(MapParams(-12, -30)) == MapParams(-18, -30)
    assert symmetry_conjugate(MapParams(-15, -30)) == MapParams(-15, -30)
    p = MapParams(-12, -30)
    q = symmetry_conjugate(p)
    xs = np.random.default_rng(7).uniform(-30, 30, 100)
    assert np.max(np.abs(evaluate(p, xs) + evaluate(q, -xs))) < 1e-12


@settings(max_examples=200, deadline=None)
@given(b=st.integers(-2**30, 0), k=st.integers(-2**30, 0))
def test_symmetry_involution_exact_on_dyadic_grid(b, k):
    p = MapParams(b / 2**20, k / 2**20)
    assert symmetry_conjugate(symmetry_conjugate(p)) == p


@settings(max_examples=200, deadline=None)
@given(b=st.floats(-100, 0, allow_nan=False), k=st.floats(-100, 0, allow_nan=False))
def test_symmetry_involution_to_rounding(b, k):
    q = symmetry_conjugate(symmetry_conjugate(MapParams(b, k)))
    assert q.k == k
    assert abs(q.b - b) <= 2 * np.spacing(max(abs(k), abs(b), 1e-300))


@settings(max_examples=200, deadline=None)
@given(k=st.floats(-60, -4.01), x=st.floats(-30, 30))
def test_extrema_antisymmetric(k, x):
    x_max, x_min = extrema(k)
    assert x_min > 0 and x_min == -x_max


def test_fixed_point_multiplier_closed_form(rng):
    for _ in range(50):
        k = rng.uniform(-60, -1)
        b = rng.uniform(k, 0)
        p = MapParams(b, k)
        x_star = critical_points(p).x_star
        assert fixed_point_multiplier(p) == pytest.approx(derivative(p, x_star, 1), abs=1e-12)
