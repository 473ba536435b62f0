import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabipiston.schedule import ControlSchedule, phi_eval

HALF_PI = math.pi / 2


def test_reference_values():
    s = ControlSchedule.reference(60.0)
    assert s(0.0) == 0.0
    assert s(60.0) == pytest.approx(HALF_PI, abs=1e-15)
    assert s(30.0) == pytest.approx(math.pi / 4, abs=1e-15)
    assert s.derivative(0.0) == 0.0
    assert s.derivative(60.0) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.1, 0.6), st.floats(-0.1, 0.6), st.floats(1.0, 200.0))
def test_quintic_six_constraints(c1, c2, t_f):
    s = ControlSchedule.quintic(t_f, c1, c2)
    assert abs(s(0.0)) < 1e-12
    assert abs(s(t_f) - HALF_PI) < 1e-12
    assert abs(s.derivative(0.0)) * t_f < 1e-12
    assert abs(s.derivative(t_f)) * t_f < 1e-12
    assert abs(s(t_f / 3) - math.pi * c1) < 1e-12
    assert abs(s(2 * t_f / 3) - math.pi * c2) < 1e-12


def test_quintic_through_cubic_values_is_the_cubic():
    ref = ControlSchedule.reference(60.0)
    c1, c2 = ref(20.0) / math.pi, ref(40.0) / math.pi
    assert (c1, c2) == pytest.approx((7 / 54, 10 / 27))
    q = ControlSchedule.quintic(60.0, c1, c2)
    t = np.linspace(0, 60, 121)
    np.testing.assert_allclose(q(t), ref(t), atol=1e-12)
    np.testing.assert_allclose(q.coeffs[4:], 0.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.1, 0.6), st.floats(-0.1, 0.6), st.floats(0.0, 1.0))
def test_derivative_matches_finite_difference(c1, c2, u):
    s = ControlSchedule.quintic(50.0, c1, c2)
    t = min(max(50.0 * u, 1e-3), 50.0 - 1e-3)
    h = 1e-4
    fd = (s(t + h) - s(t - h)) / (2 * h)
    assert s.derivative(t) == pytest.approx(fd, abs=1e-8)


def test_vectorised_and_scalar_evaluation_agree():
    s = ControlSchedule.quintic(60.0, 0.276, 0.049)
    t = np.linspace(0, 60, 7)
    np.testing.assert_array_equal(s(t), [s(float(v)) for v in t])
    assert isinstance(phi_eval(s, 10.0), float)


def test_non_monotone_profile_allowed():
    s = ControlSchedule.quintic(60.0, 0.276, 0.049)
    t = np.linspace(0, 60, 601)
    phi = s(t)
    assert phi.max() > HALF_PI
    assert np.any(np.diff(phi) < 0)


@pytest.mark.parametrize("t", [-1.0, 60.5])
def test_time_outside_protocol_rejected(t):
    with pytest.raises(ValueError):
        ControlSchedule.reference(60.0)(t)


def test_construction_errors():
    with pytest.raises(ValueError):
        ControlSchedule.reference(0.0)
    with pytest.raises(ValueError):
        ControlSchedule("constrained-quintic", 10.0)
    with pytest.raises(ValueError):
        ControlSchedule("spline", 10.0)
    assert "c1=0.3" in ControlSchedule.quintic(10.0, 0.3, 0.1).describe()
