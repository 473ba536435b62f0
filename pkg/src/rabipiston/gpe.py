"""Split-step Fourier propagation of the Rabi-coupled Gross-Pitaevskii equations.

Hamiltonian density (units eps, tau, ell; wavefunction normalised to one)::

    H = -1/2 d^2/dx^2 + V_L(x) + V(x - a) + (delta/2)(cos(phi) sz + sin(phi) sy) + G

with G = diag(g_s|u|^2 + g_c|d|^2, g_s|d|^2 + g_c|u|^2). One Strang step is
D(h/2) R(h/2) K(h) R(h/2) D(h/2), where D is the diagonal potential +
mean-field factor, R the closed-form exponential of the Rabi matrix and K the
kinetic factor applied in Fourier space. Every factor is exactly unitary in
real time. Imaginary time uses the same splitting with t -> -i t and
renormalisation after every step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import _kernels as kern
from .config import SystemParams
from .grid import Grid, SpinorField, box_mode, normalize
from .potentials import RampForce, WallSpec, left_wall, total_potential

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Non-finite values or loss of confinement during time stepping."""


class ConvergenceError(NumericalError):
    pass


def rabi_unitary(delta: float, phi: float, h: float) -> np.ndarray:
    """exp(-i h (delta/2)(cos(phi) sz + sin(phi) sy))."""
    th = 0.5 * delta * h
    c, s = math.cos(th), math.sin(th)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array([[complex(c, -s * cp), -s * sp], [s * sp, complex(c, s * cp)]])


def rabi_decay(delta: float, phi: float, h: float) -> np.ndarray:
    """exp(-h (delta/2)(cos(phi) sz + sin(phi) sy)), the imaginary-time factor."""
    th = 0.5 * delta * h
    c, s = math.cosh(th), math.sinh(th)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array([[c - s * cp, 1j * s * sp], [-1j * s * sp, c + s * cp]])


def _fft_inplace(psi, factor):
    f = sfft.fft(psi, axis=1, overwrite_x=True)
    f *= factor
    psi[...] = sfft.ifft(f, axis=1, overwrite_x=True)


class Evolver:
    """Real-time propagator for one condensate.

    The closing half-step of the diagonal factor is deferred and merged into
    the opening half-step of the next call; both are pure phases evaluated at
    the same density, so the merge is exact. :attr:`field` flushes it, while
    :meth:`density`, :meth:`pressure` and :meth:`magnetization` do not need to.
    """

    def __init__(self, params: SystemParams, field: SpinorField, time: float = 0.0):
        self.params = params
        self.grid = field.grid
        self.spec = WallSpec.from_params(params)
        self.time = float(time)
        self._psi = np.ascontiguousarray(field.data, dtype=complex).copy()
        self._x = np.ascontiguousarray(self.grid.x)
        self._wall = np.ascontiguousarray(left_wall(self._x, self.spec))
        self._kinetic = {}
        self._pending = None
        self._force = RampForce(self.grid, self.spec)
        self._rho = np.empty(self.grid.n)

    def _kinetic_factor(self, dt):
        fac = self._kinetic.get(dt)
        if fac is None:
            fac = np.exp(-0.5j * dt * self.grid.k**2)
            self._kinetic[dt] = fac
        return fac

    def step(self, dt: float, a: float, phi: float) -> None:
        """Advance by ``dt`` with the piston frozen at ``a`` and Rabi angle ``phi``."""
        if not dt > 0:
            raise ValueError("dt must be positive")
        p = self.params
        half = 0.5 * dt
        r = rabi_unitary(p.delta, phi, half)
        if self._pending is None:
            a1, w1, a2, w2 = a, half, a, 0.0
        else:
            a1, w1 = self._pending
            a2, w2 = a, half
        kern.diag_real(self._psi, self._x, self._wall, self.spec.v_piston, self.spec.slope_s,
                       a1, w1, a2, w2, w1 + w2, p.g_s, p.g_c, True,
                       r[0, 0], r[0, 1], r[1, 0], r[1, 1])
        _fft_inplace(self._psi, self._kinetic_factor(dt))
        kern.mix(self._psi, r[0, 0], r[0, 1], r[1, 0], r[1, 1])
        self._pending = (a, half)
        self.time += dt

    def flush(self) -> None:
        if self._pending is not None:
            a, w = self._pending
            p = self.params
            kern.diag_real(self._psi, self._x, self._wall, self.spec.v_piston, self.spec.slope_s,
                           a, w, a, 0.0, w, p.g_s, p.g_c, False, 1, 0, 0, 1)
            self._pending = None

    @property
    def field(self) -> SpinorField:
        self.flush()
        return SpinorField(self.grid, self._psi.copy())

    def density(self) -> np.ndarray:
        return kern.density(self._psi, np.empty(self.grid.n))

    def pressure(self, a: float) -> float:
        return self._force(kern.density(self._psi, self._rho), a)

    def magnetization(self) -> float:
        pops = (self._psi.real**2 + self._psi.imag**2).sum(axis=1) * self.grid.dx
        return float(pops[0] - pops[1])

    def check(self, boundary_tol: float = 1e-8, strict: bool = True, quiet: bool = False) -> float:
        """Raise NumericalError on non-finite values; returns the edge density.

        Edge density above ``boundary_tol`` means the condensate reaches the
        periodic boundary; it raises when ``strict`` and is logged otherwise.
        """
        psi = self._psi
        if not np.isfinite(psi).all():
            raise NumericalError(f"non-finite field at t={self.time:.6g}; step too large?")
        edge = float(self.density()[[0, -1]].sum())
        if edge > boundary_tol:
            msg = (f"boundary density {edge:.3g} at t={self.time:.6g} exceeds {boundary_tol:g}; "
                   "condensate is leaking through the periodic boundary")
            if strict:
                raise NumericalError(msg)
            if not quiet:
                log.warning(msg)
        return edge


def step_real(field: SpinorField, dt: float, a: float, phi: float,
              params: SystemParams) -> SpinorField:
    """One real-time Strang step; returns a new field."""
    ev = Evolver(params, field)
    ev.step(dt, a, phi)
    out = ev.field
    if not np.isfinite(out.data).all():
        raise NumericalError("non-finite field after step; step too large?")
    return out


def energy_functional(field: SpinorField, a: float, phi: float, params: SystemParams) -> float:
    """Mean-field energy per particle (units eps); kinetic part evaluated spectrally."""
    g = field.grid
    u, d = field.data
    coeffs = field.spectral()
    kinetic = 0.5 * float((g.k**2 * (np.abs(coeffs) ** 2).sum(axis=0)).sum()) / g.n
    nu = u.real**2 + u.imag**2
    nd = d.real**2 + d.imag**2
    pot = total_potential(g.x, a, WallSpec.from_params(params))
    rabi = 0.5 * params.delta * (math.cos(phi) * (nu - nd)
                                 + 2 * math.sin(phi) * np.imag(np.conj(u) * d))
    inter = 0.5 * params.g_s * (nu**2 + nd**2) + params.g_c * nu * nd
    return kinetic * g.dx + float((pot * (nu + nd) + rabi + inter).sum()) * g.dx


@dataclass
class GroundStateResult:
    field: SpinorField
    energy: float
    iterations: int
    residual: float


def _check_position(a, params):
    x0, x1 = params.domain
    if not (x0 < 0 < a and a + 4 * params.slope_s <= x1):
        raise ValueError(f"a={a!r} must lie in (0, {x1 - 4 * params.slope_s:g}]")


def ground_state(a: float, phi: float, params: SystemParams, tol: float = 1e-10,
                 initial: SpinorField | None = None, max_steps: int = 2_000_000,
                 check_every: int = 100, dt: float | None = None) -> GroundStateResult:
    """Imaginary-time relaxation to the lowest-energy state at fixed (a, phi).

    Converged once the energy changes by less than ``tol`` over ``check_every``
    consecutive steps. ``initial`` defaults to an equal-weight box mode on
    [0, a]; pass a neighbouring solution to warm-start parameter sweeps.
    """
    _check_position(a, params)
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = Grid.from_params(params)
    spec = WallSpec.from_params(params)
    dt = params.dt_imag if dt is None else dt
    psi = (initial.copy() if initial is not None else box_mode(grid, a)).data
    psi = np.ascontiguousarray(psi, dtype=complex)
    x = np.ascontiguousarray(grid.x)
    wall = np.ascontiguousarray(left_wall(x, spec))
    kinetic = np.exp(-0.5 * dt * grid.k**2)
    r = rabi_decay(params.delta, phi, 0.5 * dt)
    args = (x, wall, spec.v_piston, spec.slope_s, a, 0.5 * dt, params.g_s, params.g_c)
    dx = grid.dx

    e_prev = math.inf
    residual = math.inf
    for it in range(1, max_steps + 1):
        kern.diag_imag(psi, *args, False, r[0, 0], r[0, 1], r[1, 0], r[1, 1])
        _fft_inplace(psi, kinetic)
        kern.diag_imag(psi, *args, True, r[0, 0], r[0, 1], r[1, 0], r[1, 1])
        nrm = math.sqrt(float((psi.real**2 + psi.imag**2).sum()) * dx)
        if not (math.isfinite(nrm) and nrm > 0):
            raise NumericalError(f"imaginary-time field degenerated at a={a}, phi={phi}")
        psi /= nrm
        if it % check_every == 0:
            e = energy_functional(SpinorField(grid, psi), a, phi, params)
            residual = abs(e_prev - e)
            if residual < tol:
                return GroundStateResult(SpinorField(grid, psi), e, it, residual)
            e_prev = e
    raise ConvergenceError(
        f"ground state at a={a}, phi={phi} not converged after {max_steps} steps "
        f"(|dE|={residual:.3g} > {tol:g})")


def evolve_imaginary(field: SpinorField, a: float, phi: float, params: SystemParams,
                     steps: int, dt: float | None = None) -> tuple[SpinorField, list[float]]:
    """Run ``steps`` imaginary-time steps and record the energy after each one."""
    grid = field.grid
    spec = WallSpec.from_params(params)
    dt = params.dt_imag if dt is None else dt
    psi = np.ascontiguousarray(normalize(field).data)
    x = np.ascontiguousarray(grid.x)
    wall = np.ascontiguousarray(left_wall(x, spec))
    kinetic = np.exp(-0.5 * dt * grid.k**2)
    r = rabi_decay(params.delta, phi, 0.5 * dt)
    args = (x, wall, spec.v_piston, spec.slope_s, a, 0.5 * dt, params.g_s, params.g_c)
    energies = []
    for _ in range(steps):
        kern.diag_imag(psi, *args, False, r[0, 0], r[0, 1], r[1, 0], r[1, 1])
        _fft_inplace(psi, kinetic)
        kern.diag_imag(psi, *args, True, r[0, 0], r[0, 1], r[1, 0], r[1, 1])
        psi /= math.sqrt(float((psi.real**2 + psi.imag**2).sum()) * grid.dx)
        energies.append(energy_functional(SpinorField(grid, psi), a, phi, params))
    return SpinorField(grid, psi), energies
