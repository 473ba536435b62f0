import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from rabipiston.trial import (TrialParams, energy_of_occupation, magnetization, shift_sweep,
                              trial_energy, trial_occupation, trial_pressure, trial_pressure_shift)

trial_params = st.builds(TrialParams, st.floats(0.5, 20.0), st.floats(0.0, 30.0),
                         st.floats(0.2, 5.0))


def brute_force_energy(p):
    res = minimize_scalar(lambda n: energy_of_occupation(p, n), bounds=(0.0, 1.0),
                          method="bounded", options={"xatol": 1e-12})
    return min(res.fun, energy_of_occupation(p, 1.0), energy_of_occupation(p, 0.0))


def test_params_validated():
    for bad in [(0.0, 1.0, 1.0), (5.0, -1.0, 1.0), (5.0, 1.0, 0.0)]:
        with pytest.raises(ValueError):
            TrialParams(*bad)


def test_occupation_examples():
    assert trial_occupation(TrialParams(5.0, 0.0, 1.3)) == 0.5
    assert trial_occupation(TrialParams(5.0, 7.5, 1.0)) == 1.0
    assert trial_occupation(TrialParams(5.0, 3.75, 1.0)) == pytest.approx(0.75)
    assert magnetization(TrialParams(5.0, 0.0, 1.0)) == 0.0


def test_energy_examples():
    assert trial_energy(TrialParams(5.0, 0.0, 1.0)) == pytest.approx(math.pi**2 / 2 + 15 / 8,
                                                                     abs=1e-14)


@pytest.mark.parametrize("a,g", [(1.0, 5.0), (1.7, 5.0), (0.6, 2.0)])
def test_branches_continuous_at_critical_delta(a, g):
    d_cr = TrialParams(g, 0.0, a).delta_cr
    lo = TrialParams(g, d_cr * (1 - 1e-15), a)
    hi = TrialParams(g, d_cr, a)
    assert trial_energy(lo) == pytest.approx(trial_energy(hi), abs=1e-12)
    assert trial_pressure_shift(lo) == pytest.approx(trial_pressure_shift(hi), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(trial_params)
def test_closed_form_matches_minimisation(p):
    assert trial_energy(p) == pytest.approx(brute_force_energy(p), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(trial_params)
def test_occupation_minimises_energy(p):
    n = trial_occupation(p)
    assert 0.5 <= n <= 1.0
    assert energy_of_occupation(p, n) == pytest.approx(trial_energy(p), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(trial_params)
def test_shift_is_energy_derivative(p):
    h = 1e-6
    if abs(p.a - p.a_cr) < 10 * h:
        return

    def shifted(a):
        return trial_energy(TrialParams(p.g_s, p.delta, a)) - trial_energy(TrialParams(p.g_s, 0.0, a))

    fd = -(shifted(p.a + h) - shifted(p.a - h)) / (2 * h)
    assert trial_pressure_shift(p) == pytest.approx(fd, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(trial_params)
def test_total_pressure_is_energy_derivative(p):
    h = 1e-6
    if abs(p.a - p.a_cr) < 10 * h:
        return
    fd = -(trial_energy(TrialParams(p.g_s, p.delta, p.a + h))
           - trial_energy(TrialParams(p.g_s, p.delta, p.a - h))) / (2 * h)
    assert trial_pressure(p) == pytest.approx(fd, rel=1e-6, abs=1e-6)


@given(st.floats(0.5, 20.0), st.floats(0.2, 5.0), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_occupation_nondecreasing(g, a, d1, d2):
    lo, hi = sorted((d1, d2))
    assert trial_occupation(TrialParams(g, lo, a)) <= trial_occupation(TrialParams(g, hi, a))
    assert trial_occupation(TrialParams(g, d1, a)) <= trial_occupation(TrialParams(g, d1, a * 1.5))


def test_shift_continuous_in_a_at_merge_point():
    g, d = 5.0, 2.0
    a_cr = TrialParams(g, d, 1.0).a_cr
    assert a_cr == pytest.approx(3.75)
    left = trial_pressure_shift(TrialParams(g, d, a_cr * (1 - 1e-12)))
    right = trial_pressure_shift(TrialParams(g, d, a_cr * (1 + 1e-12)))
    assert left == pytest.approx(right, rel=1e-10)


def test_shift_plateau_then_decay():
    rows = shift_sweep(np.linspace(0.5, 4.0, 36), [1.0, 2.0, 5.0], 5.0)
    assert len(rows) == 108
    for d in (1.0, 2.0, 5.0):
        curve = [(a, s) for a, dd, s in rows if dd == d]
        a_cr = 1.5 * 5.0 / d
        for a, s in curve:
            if a <= a_cr:
                assert s == pytest.approx(d * d / 30.0)
            else:
                assert s < d * d / 30.0
    assert TrialParams(5.0, 0.0, 1.0).a_cr == math.inf
    assert trial_pressure_shift(TrialParams(5.0, 0.0, 1.0)) == 0.0
