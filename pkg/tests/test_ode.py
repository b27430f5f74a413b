import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bimodalmap import (MapParams, NoCrossings, OdeParams, OdeState, evaluate, integrate,
                        poincare_section, reduced_map_params, return_map_cloud, vector_field)
from bimodalmap.exceptions import StepUnderflow
from bimodalmap.ode import cloud_thickness, four_parameter_map, section_events

P = OdeParams(1.933, 5.048, 0.327, 0.332, 0.068, 1.684)
START = OdeState(0.1, 0.1, 0.5)


@pytest.fixture(scope="module")
def on_attractor():
    tr = integrate(P, START, 3000.0, 1e-10)
    return OdeState(*(float(v) for v in tr.y[-1]))


def test_vector_field_examples():
    assert vector_field(P, OdeState(0, 0, 0)) == (0.0, 0.0, 0.0)
    assert vector_field(P, OdeState(0, 0, 1))[2] == 0.0
    assert vector_field(P, OdeState(0.3, 0.2, P.lambda1))[0] == 0.0


def test_params_and_state_validation():
    with pytest.raises(ValueError):
        OdeParams(1, 1, 0.3, 0.3, 0.1, -0.1)
    with pytest.raises(ValueError):
        OdeState(-1e-3, 0.1, 0.5)
    assert P.swapped().swapped() == P


def test_integrate_equilibrium_constant():
    tr = integrate(P, OdeState(0.0, 0.0, 1.0), 50.0, 1e-9)
    assert np.allclose(tr.y, [0.0, 0.0, 1.0], atol=1e-9)


def test_integrate_tol_bounds():
    for tol in (1e-13, 1e-3):
        with pytest.raises(ValueError):
            integrate(P, START, 1.0, tol)


def test_positive_octant_and_bounded():
    tr = integrate(P, START, 10_000.0, 1e-8)
    assert tr.y.min() >= -1e-12
    assert np.max(tr.y.sum(axis=1)) < 10.0


def test_bounded_long_run_halved_tolerance():
    b = integrate(P, START, 10_000.0, 5e-9)
    assert b.y.min() >= -1e-12 and np.max(b.y.sum(axis=1)) < 10.0


def test_state_convergence_under_halving():
    for tol in (1e-6, 1e-8):
        a = integrate(P, START, 50.0, tol).y[-1]
        b = integrate(P, START, 50.0, tol / 2).y[-1]
        assert np.max(np.abs(a - b)) < 10 * tol


def test_section_events_located(on_attractor):
    ev = poincare_section(P, on_attractor, 20)
    level = P.default_section
    for e in ev:
        assert abs(e.state.s - level) < 1e-9
        assert vector_field(P, e.state)[2] < 0
        assert e.x == pytest.approx(math.log(e.state.y2 / e.state.y1))
    assert all(t1 < t2 for t1, t2 in zip([e.t for e in ev], [e.t for e in ev][1:]))


def test_no_crossings_at_equilibrium():
    with pytest.raises(NoCrossings):
        poincare_section(P, OdeState(0.0, 0.0, 1.0), 5, s_level=0.5, t_max=400.0)


def test_section_level_must_be_positive():
    with pytest.raises(ValueError):
        poincare_section(P, START, 5, s_level=0.0)


def test_symmetric_parameters_commute_with_reflection():
    q = OdeParams(1.5, 1.5, 0.3, 0.3, 0.4, 0.4)
    a = poincare_section(q, OdeState(0.05, 0.2, 0.6), 15, tol=1e-9)
    b = poincare_section(q, OdeState(0.2, 0.05, 0.6), 15, tol=1e-9)
    assert np.max(np.abs(np.array([e.x for e in a]) + np.array([e.x for e in b]))) < 1e-3


def test_exchange_negates_cloud(on_attractor):
    a = return_map_cloud(P, on_attractor, 40)
    b = return_map_cloud(P.swapped(), on_attractor.swapped(), 40)
    assert np.max(np.abs(a + b)) < 1e-8


def test_return_map_cloud_shape_and_thickness(on_attractor):
    cloud = return_map_cloud(P, on_attractor, 60)
    assert cloud.shape == (59, 2)
    assert np.array_equal(cloud[1:, 0], cloud[:-1, 1])
    assert cloud_thickness(cloud) < 0.05
    with pytest.raises(ValueError):
        return_map_cloud(P, on_attractor, 1)


def test_cloud_thickness_oracle():
    x = np.linspace(-1, 1, 400)
    assert cloud_thickness(np.column_stack([x, x ** 2])) < 0.06
    assert cloud_thickness(np.column_stack([x, np.full_like(x, 3.0)])) == 0.0
    noisy = np.column_stack([x, 0.5 + np.where(np.arange(400) % 2, 0.1, -0.1)])
    assert cloud_thickness(noisy) == pytest.approx(0.1, abs=0.01)


def test_constant_cloud_on_diagonal():
    c = np.column_stack([np.full(10, 0.7), np.full(10, 0.7)])
    assert np.all(c[:, 0] == c[:, 1]) and cloud_thickness(c) == 0.0


@settings(max_examples=100, deadline=None)
@given(beta=st.floats(-20, 0), u=st.floats(0.01, 3), k1=st.floats(-30, 0), k2=st.floats(-30, 30),
       x=st.floats(-30, 30))
def test_reduction_identity(beta, u, k1, k2, x):
    p = reduced_map_params(beta, u, k1, k2)
    lhs = four_parameter_map(beta, u, k1, k2, x)
    assert evaluate(p, x) == pytest.approx(lhs, abs=1e-9 * (1 + abs(lhs) + abs(u * k2)))


def test_step_underflow_reported(monkeypatch):
    import bimodalmap.ode as ode

    class Res:
        status, message, t, y, sol = -1, "Required step size is less than spacing", None, None, None

    monkeypatch.setattr(ode, "solve_ivp", lambda *a, **k: Res())
    with pytest.raises(StepUnderflow):
        ode.integrate(P, START, 1.0)


def test_section_events_on_precomputed_trajectory():
    tr = integrate(P, START, 100.0, 1e-9)
    ev = section_events(tr, P.default_section)
    ev2 = poincare_section(P, START, len(ev), chunk=100.0)
    assert [e.t for e in ev] == pytest.approx([e.t for e in ev2], abs=1e-9)
