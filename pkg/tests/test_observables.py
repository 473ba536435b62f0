import math

import numpy as np
import pytest
import scipy.fft as sfft
from scipy.integrate import quad

from rabipiston.config import SystemParams
from rabipiston.gpe import ground_state
from rabipiston.grid import Grid, SpinorField
from rabipiston.observables import WorkLedger, pressure_exact, pressure_stationary, work_report
from rabipiston.piston import PistonTrajectory, SurfaceRangeError
from rabipiston.potentials import WallSpec, piston_barrier_deriv

from conftest import synthetic_surface


def interpolant(field):
    """Band-limited continuous density of a grid field, evaluated pointwise."""
    g = field.grid
    coeffs = sfft.fft(field.data, axis=1) / g.n
    k = g.k

    def rho(x):
        modes = np.exp(1j * k * (x - g.x_min))
        return float(np.sum(np.abs(coeffs @ modes) ** 2))
    return rho


def reference_pressure(rho, a, spec):
    s = spec.slope_s
    val, _ = quad(lambda x: rho(x) * piston_barrier_deriv(x - a, spec), a - s, a + s,
                  limit=200, epsabs=1e-13, epsrel=1e-13)
    return val


@pytest.mark.parametrize("a", [1.8, 1.65, 1.7123])
def test_pressure_of_gaussian_matches_quadrature(defaults, a):
    g = Grid.from_params(defaults)
    spec = WallSpec.from_params(defaults)

    def rho(x):
        return np.exp(-((x - a) ** 2) / (2 * 0.2**2)) / (0.2 * math.sqrt(2 * math.pi))
    f = SpinorField(g, np.sqrt(0.5 * rho(g.x)), np.sqrt(0.5 * rho(g.x)))
    assert pressure_exact(f, a, defaults) == pytest.approx(reference_pressure(rho, a, spec),
                                                           abs=1e-8)


def test_pressure_of_ground_state_matches_quadrature(coarse):
    gs = ground_state(1.75, 0.4, coarse)
    ref = reference_pressure(interpolant(gs.field), 1.75, WallSpec.from_params(coarse))
    assert pressure_exact(gs.field, 1.75, coarse) == pytest.approx(ref, abs=1e-8)


def test_pressure_of_constant_density(defaults):
    """Uniform density rho0 across the ramp pushes with rho0 * V0."""
    g = Grid.from_params(defaults)
    f = SpinorField(g, np.full(g.n, 0.3), np.full(g.n, 0.4))
    assert pressure_exact(f, 1.8, defaults) == pytest.approx(0.25 * defaults.v_piston, rel=1e-12)


def test_no_density_on_ramp_gives_no_pressure(defaults):
    g = Grid.from_params(defaults)
    f = SpinorField(g, np.exp(-((g.x - 0.5) ** 2) / 0.005), np.zeros(g.n))
    assert abs(pressure_exact(f, 1.8, defaults)) < 1e-12


def test_stationary_pressure_is_minus_energy_slope(defaults):
    h = 1e-3
    p_st, e0, gs = pressure_stationary(1.75, 0.3, defaults, tol=1e-12, return_state=True)
    _, e_plus = pressure_stationary(1.75 + h, 0.3, defaults, tol=1e-12, initial=gs.field)
    _, e_minus = pressure_stationary(1.75 - h, 0.3, defaults, tol=1e-12, initial=gs.field)
    assert p_st == pytest.approx(-(e_plus - e_minus) / (2 * h), abs=1e-3)


def test_ledger_text_roundtrip():
    led = WorkLedger(-0.2, -0.21, 0.01, -0.6, -0.81)
    back = WorkLedger.from_text(led.to_text("# header\n"))
    assert back == led
    assert led.closure == pytest.approx(-0.81 - (-0.2 - 0.6 - 0.01))
    assert "closure" in led.to_text()


def synthetic_run(surface, noise=0.0, n=4001, t_f=60.0):
    t = np.linspace(0, t_f, n)
    u = t / t_f
    a = 1.80 - 0.12 * (3 * u**2 - 2 * u**3) + 0.01 * np.sin(3 * np.pi * u)
    v = np.gradient(a, t, edge_order=2)
    phi = 0.5 * np.pi * (3 * u**2 - 2 * u**3)
    dphi = 0.5 * np.pi * (6 * u - 6 * u**2) / t_f
    p_st, _ = surface.interpolate(a, phi)
    p = p_st + noise * np.sin(20 * np.pi * u)
    return PistonTrajectory(t, a, v, p, np.zeros(n), phi, "exact", dphi)


def test_work_ledger_closure_on_analytic_surface():
    surf = synthetic_surface(na=40, nphi=40)
    run = synthetic_run(surf, noise=0.02)
    led = work_report(run, surf)
    assert abs(led.closure) < 1e-5
    assert led.dw_p == pytest.approx(led.w_p - led.w_p_st)
    # E_st from the analytic energy
    def energy(a, phi):
        return 4.0 / a**2 + 0.3 * a * math.cos(phi) + 0.1 * math.sin(phi)
    assert led.e_st == pytest.approx(energy(run.a[-1], run.phi[-1]) - energy(run.a[0], 0.0),
                                     abs=1e-5)


def test_work_ledger_without_stored_phase_rate():
    surf = synthetic_surface(na=40, nphi=40)
    run = synthetic_run(surf)
    with_rate = work_report(run, surf)
    run.dphi = None
    assert work_report(run, surf).w_phi_st == pytest.approx(with_rate.w_phi_st, abs=1e-6)


def test_work_report_rejects_uncovered_runs():
    surf = synthetic_surface(a_range=(1.7, 1.95))
    with pytest.raises(SurfaceRangeError, match="a excursion"):
        work_report(synthetic_run(synthetic_surface()), surf)
