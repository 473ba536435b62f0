"""Classical piston dynamics, exact (live condensate) and surrogate (tabulated).

Newton's equation for the piston, in units where the force unit is rho and
the piston mass is ``mass_ratio`` condensate masses::

    mass_ratio * a'' = -spring_k * a + P

Exact mode takes P from the evolving condensate; surrogate mode takes the
stationary pressure P_st(a, phi) from a precomputed table.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import brentq

from .config import SystemParams
from .gpe import Evolver, NumericalError, ground_state
from .grid import magnetization, write_field_csv
from .observables import pressure_exact
from .schedule import ControlSchedule


class SurfaceRangeError(ValueError):
    """A query or trajectory left the tabulated (a, phi) range."""


class PistonRangeError(NumericalError):
    """The piston left the region where the grid can hold the condensate."""


# --------------------------------------------------------------------------
# trajectories

@dataclass
class PistonTrajectory:
    times: np.ndarray
    a: np.ndarray
    v: np.ndarray
    p: np.ndarray
    s_mag: np.ndarray
    phi: np.ndarray
    mode: str
    dphi: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.times)
        for name in ("a", "v", "p", "s_mag", "phi"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"trajectory array {name} has wrong length")

    @property
    def final_position(self) -> float:
        return float(self.a[-1])

    @property
    def final_velocity(self) -> float:
        return float(self.v[-1])

    def subsample(self, every: int) -> "PistonTrajectory":
        idx = np.arange(0, len(self.times), every)
        if idx[-1] != len(self.times) - 1:
            idx = np.append(idx, len(self.times) - 1)
        pick = lambda arr: None if arr is None else arr[idx]  # noqa: E731
        return PistonTrajectory(self.times[idx], self.a[idx], self.v[idx], self.p[idx],
                                self.s_mag[idx], self.phi[idx], self.mode, pick(self.dphi))

    def to_csv(self, path, header: str = "") -> None:
        table = np.column_stack([self.times, self.a, self.v, self.p, self.s_mag, self.phi])
        with open(path, "w") as fh:
            fh.write(header)
            fh.write(f"# mode = {self.mode}\n")
            fh.write("t,a,v,P,S,phi\n")
            np.savetxt(fh, table, delimiter=",", fmt="%.12g")

    @classmethod
    def from_csv(cls, path) -> "PistonTrajectory":
        mode = "exact"
        rows = []
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                if line[1:].strip().startswith("mode"):
                    mode = line.split("=", 1)[1].strip()
                continue
            if line.startswith("t,"):
                continue
            if line.strip():
                rows.append(line)
        table = np.loadtxt(rows, delimiter=",", ndmin=2)
        return cls(*(table[:, i].copy() for i in range(6)), mode=mode)


# --------------------------------------------------------------------------
# stationary surface

_HERMITE = np.array([[1.0, 0, 0, 0], [0, 0, 1, 0], [-3, 3, -2, -1], [2, -2, 1, 1]])


def _patches(a_grid, phi_grid, values):
    """Per-cell bicubic coefficients c[i, j, m, n] of u**m w**n, u, w in [0, 1].

    Corner derivatives come from the interpolating bicubic spline, so each
    patch coincides with that spline on its cell.
    """
    spl = RectBivariateSpline(a_grid, phi_grid, values, kx=3, ky=3, s=0)
    f = values
    fa = spl(a_grid, phi_grid, dx=1)
    fp = spl(a_grid, phi_grid, dy=1)
    fap = spl(a_grid, phi_grid, dx=1, dy=1)
    ha = np.diff(a_grid)[:, None]
    hp = np.diff(phi_grid)[None, :]

    def corners(g):
        return g[:-1, :-1], g[:-1, 1:], g[1:, :-1], g[1:, 1:]

    f00, f01, f10, f11 = corners(f)
    a00, a01, a10, a11 = (c * ha for c in corners(fa))
    p00, p01, p10, p11 = (c * hp for c in corners(fp))
    x00, x01, x10, x11 = (c * ha * hp for c in corners(fap))
    m = np.stack([
        np.stack([f00, f01, p00, p01], -1),
        np.stack([f10, f11, p10, p11], -1),
        np.stack([a00, a01, x00, x01], -1),
        np.stack([a10, a11, x10, x11], -1),
    ], -2)
    return np.einsum("mi,abij,nj->abmn", _HERMITE, m, _HERMITE)


@njit(cache=True)
def _locate(grid, x):
    i = np.searchsorted(grid, x, side="right") - 1
    if i < 0:
        i = 0
    if i > grid.size - 2:
        i = grid.size - 2
    return i, (x - grid[i]) / (grid[i + 1] - grid[i])


@njit(cache=True)
def _patch_value(coef, a_grid, phi_grid, a, phi):
    i, u = _locate(a_grid, a)
    j, w = _locate(phi_grid, phi)
    c = coef[i, j]
    out = 0.0
    um = 1.0
    for m in range(4):
        row = c[m, 0] + w * (c[m, 1] + w * (c[m, 2] + w * c[m, 3]))
        out += um * row
        um *= u
    return out


@njit(cache=True)
def _patch_dphi(coef, a_grid, phi_grid, a, phi):
    i, u = _locate(a_grid, a)
    j, w = _locate(phi_grid, phi)
    c = coef[i, j]
    out = 0.0
    um = 1.0
    for m in range(4):
        out += um * (c[m, 1] + w * (2.0 * c[m, 2] + 3.0 * w * c[m, 3]))
        um *= u
    return out / (phi_grid[j + 1] - phi_grid[j])


@njit(cache=True)
def _patch_da(coef, a_grid, phi_grid, a, phi):
    i, u = _locate(a_grid, a)
    j, w = _locate(phi_grid, phi)
    c = coef[i, j]
    out = 0.0
    um = 1.0
    for m in range(1, 4):
        row = c[m, 0] + w * (c[m, 1] + w * (c[m, 2] + w * c[m, 3]))
        out += m * um * row
        um *= u
    return out / (a_grid[i + 1] - a_grid[i])


@njit(cache=True)
def _patch_many(kind, coef, a_grid, phi_grid, a, phi, out):
    for k in range(a.size):
        if kind == 0:
            out[k] = _patch_value(coef, a_grid, phi_grid, a[k], phi[k])
        elif kind == 1:
            out[k] = _patch_da(coef, a_grid, phi_grid, a[k], phi[k])
        else:
            out[k] = _patch_dphi(coef, a_grid, phi_grid, a[k], phi[k])


class StationarySurface:
    """Ground-state energy, stationary pressure and magnetisation on an (a, phi) grid."""

    def __init__(self, a_grid, phi_grid, e_values, p_values, s_values=None):
        self.a_grid = np.ascontiguousarray(a_grid, dtype=float)
        self.phi_grid = np.ascontiguousarray(phi_grid, dtype=float)
        self.e_values = np.asarray(e_values, dtype=float)
        self.p_values = np.asarray(p_values, dtype=float)
        shape = (self.a_grid.size, self.phi_grid.size)
        if min(shape) < 4:
            raise ValueError("bicubic surface needs at least 4 nodes per axis")
        for g in (self.a_grid, self.phi_grid):
            if not np.all(np.diff(g) > 0):
                raise ValueError("surface grids must be strictly increasing")
        if self.e_values.shape != shape or self.p_values.shape != shape:
            raise ValueError(f"tables must have shape {shape}")
        if not np.all(self.p_values > 0):
            raise ValueError("stationary pressures must be positive")
        self.s_values = None if s_values is None else np.asarray(s_values, dtype=float)
        self._coef = {
            "e": _patches(self.a_grid, self.phi_grid, self.e_values),
            "p": _patches(self.a_grid, self.phi_grid, self.p_values),
        }
        if self.s_values is not None:
            self._coef["s"] = _patches(self.a_grid, self.phi_grid, self.s_values)

    @property
    def a_range(self):
        return float(self.a_grid[0]), float(self.a_grid[-1])

    @property
    def phi_range(self):
        return float(self.phi_grid[0]), float(self.phi_grid[-1])

    def contains(self, a, phi) -> bool:
        a, phi = np.asarray(a), np.asarray(phi)
        return bool(np.all((a >= self.a_grid[0]) & (a <= self.a_grid[-1])
                           & (phi >= self.phi_grid[0]) & (phi <= self.phi_grid[-1])))

    def check_covers(self, a, phi) -> None:
        a, phi = np.atleast_1d(a), np.atleast_1d(phi)
        lo, hi = self.a_range
        if a.min() < lo or a.max() > hi:
            raise SurfaceRangeError(
                f"a excursion to [{a.min():.6g}, {a.max():.6g}] outside surface [{lo:g}, {hi:g}]")
        lo, hi = self.phi_range
        if phi.min() < lo or phi.max() > hi:
            raise SurfaceRangeError(
                f"phi excursion to [{phi.min():.6g}, {phi.max():.6g}] outside surface "
                f"[{lo:.6g}, {hi:.6g}]")

    def _eval(self, table, a, phi, kind=0):
        self.check_covers(a, phi)
        a_arr = np.atleast_1d(np.asarray(a, dtype=float))
        phi_arr = np.broadcast_to(np.asarray(phi, dtype=float), a_arr.shape).copy()
        a_arr, phi_arr = np.broadcast_arrays(a_arr, phi_arr)
        flat_a = np.ascontiguousarray(a_arr.ravel())
        flat_p = np.ascontiguousarray(phi_arr.ravel())
        out = np.empty(flat_a.size)
        _patch_many(kind, self._coef[table], self.a_grid, self.phi_grid, flat_a, flat_p, out)
        out = out.reshape(a_arr.shape)
        return float(out[0]) if np.ndim(a) == 0 and np.ndim(phi) == 0 else out

    def interpolate(self, a, phi):
        """Bicubic ``(P_st, E_gs)`` at (a, phi); exact at the nodes."""
        return self._eval("p", a, phi), self._eval("e", a, phi)

    def interpolate_derivative(self, a, phi, wrt: str):
        """d E_gs / d a or d E_gs / d phi of the bicubic energy interpolant."""
        return self._eval("e", a, phi, kind={"a": 1, "phi": 2}[wrt])

    def magnetization(self, a, phi):
        if self.s_values is None:
            raise ValueError("surface carries no magnetisation table")
        return self._eval("s", a, phi)

    def to_file(self, path, header: str = "") -> None:
        """a-grid line, phi-grid line, E rows, P rows (and S rows when present)."""
        def row(values):
            return " ".join(f"{v:.17g}" for v in values)
        lines = [row(self.a_grid), row(self.phi_grid)]
        lines += [row(r) for r in self.e_values]
        lines += [row(r) for r in self.p_values]
        if self.s_values is not None:
            lines += [row(r) for r in self.s_values]
        Path(path).write_text(header + "\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path) -> "StationarySurface":
        rows = [ln.split() for ln in Path(path).read_text().splitlines()
                if ln.strip() and not ln.startswith("#")]
        a_grid = np.array(rows[0], dtype=float)
        phi_grid = np.array(rows[1], dtype=float)
        na = a_grid.size
        body = np.array(rows[2:], dtype=float)
        if body.shape[0] not in (2 * na, 3 * na) or body.shape[1] != phi_grid.size:
            raise ValueError(f"{path}: table shape {body.shape} inconsistent with grids")
        s_values = body[2 * na:] if body.shape[0] == 3 * na else None
        return cls(a_grid, phi_grid, body[:na], body[na:2 * na], s_values)


def interpolate(surface: StationarySurface, a, phi):
    return surface.interpolate(a, phi)


DEFAULT_SURFACE = Path(__file__).parent / "data" / "default_surface.txt"


def default_surface() -> StationarySurface:
    """The 71 x 51 table for the default parameters, shipped with the package.

    Regenerate with ``rabipiston surface --name default_surface.txt``; it is
    independent of the piston mass.
    """
    if not DEFAULT_SURFACE.exists():
        raise FileNotFoundError(f"{DEFAULT_SURFACE} missing; build it with 'rabipiston surface'")
    return StationarySurface.from_file(DEFAULT_SURFACE)


def _surface_column(args):
    a_grid, phi, params, tol, seed = args
    out = []
    prev = seed
    for a in a_grid:
        gs = ground_state(a, phi, params, tol=tol, initial=prev)
        out.append((gs.energy, pressure_exact(gs.field, a, params),
                    magnetization(gs.field), gs.iterations))
        prev = gs.field
    return out


def build_surface(a_range=(1.55, 1.90), phi_range=(-0.2 * np.pi, 0.7 * np.pi), na: int = 71,
                  nphi: int = 51, params: SystemParams | None = None, tol: float = 1e-10,
                  jobs: int = 1, progress=None) -> StationarySurface:
    """Tabulate ground states on a uniform (a, phi) grid.

    Each phi column is swept in increasing a, warm-starting every solve from its
    neighbour. Columns are independent and are farmed out when ``jobs > 1``.
    """
    if na < 8 or nphi < 8:
        raise ValueError("build_surface needs na >= 8 and nphi >= 8")
    params = params or SystemParams()
    a_grid = np.linspace(a_range[0], a_range[1], na)
    phi_grid = np.linspace(phi_range[0], phi_range[1], nphi)
    tasks = [(a_grid, phi, params, tol, None) for phi in phi_grid]
    e = np.empty((na, nphi))
    p = np.empty((na, nphi))
    s = np.empty((na, nphi))

    def collect(j, column):
        for i, (ei, pi_, si, _) in enumerate(column):
            e[i, j], p[i, j], s[i, j] = ei, pi_, si
        if progress:
            progress(j + 1, nphi)

    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for j, column in enumerate(pool.map(_surface_column, tasks)):
                    collect(j, column)
        else:
            for j, task in enumerate(tasks):
                collect(j, _surface_column(task))
    except NumericalError as exc:
        raise NumericalError(f"surface build failed: {exc}") from exc
    return StationarySurface(a_grid, phi_grid, e, p, s)


# --------------------------------------------------------------------------
# equilibria

def equilibrium_position(phi: float, params: SystemParams, surface: StationarySurface | None = None,
                         bracket=(1.5, 1.95), xtol: float = 1e-6) -> float:
    """Root of spring_k * a = P_st(a, phi).

    Uses the surface when given (bracket clipped to its range), otherwise
    direct ground-state solves warm-started along the bracketing sequence.
    """
    if surface is not None:
        lo = max(bracket[0], surface.a_range[0])
        hi = min(bracket[1], surface.a_range[1])
        return float(brentq(lambda a: params.spring_k * a - surface.interpolate(a, phi)[0],
                            lo, hi, xtol=xtol))
    cache = {"field": None}

    def f(a):
        gs = ground_state(a, phi, params, initial=cache["field"])
        cache["field"] = gs.field
        return params.spring_k * a - pressure_exact(gs.field, a, params)

    return float(brentq(f, bracket[0], bracket[1], xtol=xtol))


# --------------------------------------------------------------------------
# simulators

def _steps(t_f, dt):
    n = max(1, int(round(t_f / dt)))
    return n, t_f / n


def _resolve_tf(schedule, t_f):
    if t_f is not None and not math.isclose(t_f, schedule.t_f, rel_tol=1e-12):
        raise ValueError(f"t_f={t_f} disagrees with schedule t_f={schedule.t_f}")
    return schedule.t_f


def simulate_exact(schedule: ControlSchedule, t_f: float | None = None,
                   params: SystemParams | None = None, a0: float | None = None,
                   initial=None, dt: float | None = None, check_every: int = 1000,
                   snapshot_every: int | None = None, snapshot_dir=None) -> PistonTrajectory:
    """Piston + condensate co-simulation (velocity Verlet interleaved with GPE steps).

    Starts from the ground state at (a0, phi(0)) with zero velocity; ``a0``
    defaults to the equilibrium position at phi(0). Each GPE step sees the
    piston frozen at the midpoint of its Verlet drift and the angle at the
    step midpoint; the force is refreshed once per step.
    """
    params = params or SystemParams()
    t_f = _resolve_tf(schedule, t_f)
    n, dt = _steps(t_f, params.dt_real if dt is None else dt)
    phi0 = schedule(0.0)
    if a0 is None:
        a0 = equilibrium_position(phi0, params)
    if initial is None:
        initial = ground_state(a0, phi0, params).field
    ev = Evolver(params, initial)
    a_max = params.domain[1] - 4 * params.slope_s

    times = np.linspace(0.0, t_f, n + 1)
    phi_samples = schedule(times)
    phi_mid = schedule((np.arange(n) + 0.5) * dt)
    a_out = np.empty(n + 1)
    v_out = np.empty(n + 1)
    p_out = np.empty(n + 1)
    s_out = np.empty(n + 1)

    a, v = float(a0), 0.0
    pressure = ev.pressure(a)
    a_out[0], v_out[0], p_out[0], s_out[0] = a, v, pressure, ev.magnetization()
    inv_mass = 1.0 / params.mass_ratio
    k = params.spring_k
    snap_dir = Path(snapshot_dir) if snapshot_dir is not None else None
    if snapshot_every and snap_dir is None:
        raise ValueError("snapshot_every needs snapshot_dir")
    warned = False

    for i in range(n):
        v += 0.5 * dt * inv_mass * (pressure - k * a)
        a_new = a + dt * v
        ev.step(dt, 0.5 * (a + a_new), phi_mid[i])
        a = a_new
        pressure = ev.pressure(a)
        v += 0.5 * dt * inv_mass * (pressure - k * a)
        a_out[i + 1], v_out[i + 1], p_out[i + 1] = a, v, pressure
        s_out[i + 1] = ev.magnetization()
        if (i + 1) % check_every == 0 or i + 1 == n:
            if not (0.0 < a < a_max):
                raise PistonRangeError(f"piston left (0, {a_max:g}) at t={times[i + 1]:.6g}: a={a}")
            # leakage is reported once per run; non-finite fields always abort
            if ev.check(strict=False, quiet=warned) > 1e-8:
                warned = True
        if snapshot_every and (i + 1) % snapshot_every == 0:
            write_field_csv(ev.field, snap_dir / f"field_{i + 1:08d}.csv",
                            header=f"# t = {times[i + 1]!r}\n# a = {a!r}\n")
    return PistonTrajectory(times, a_out, v_out, p_out, s_out, phi_samples, "exact",
                            schedule.derivative(times))


@njit(cache=True)
def _rk4_surrogate(a0, v0, n, dt, t_f, poly, inv_mass, k, coef_p, coef_s, has_s,
                   a_grid, phi_grid, a_out, v_out, p_out, s_out, phi_out):
    """Fixed-step RK4; returns -1, or the sample index where the table was left."""
    a_lo, a_hi = a_grid[0], a_grid[-1]
    f_lo, f_hi = phi_grid[0], phi_grid[-1]

    def phi_at(t):
        u = t / t_f
        out = 0.0
        for c in poly[::-1]:
            out = out * u + c
        return out

    a, v = a0, v0
    for i in range(n + 1):
        t = i * dt
        ph = phi_at(t)
        if a < a_lo or a > a_hi or ph < f_lo or ph > f_hi:
            return i
        a_out[i] = a
        v_out[i] = v
        phi_out[i] = ph
        p_out[i] = _patch_value(coef_p, a_grid, phi_grid, a, ph)
        if has_s:
            s_out[i] = _patch_value(coef_s, a_grid, phi_grid, a, ph)
        if i == n:
            break
        ph_mid = phi_at(t + 0.5 * dt)
        ph_end = phi_at(t + dt)
        if ph_mid < f_lo or ph_mid > f_hi:
            return i + 1
        k1a = v
        k1v = inv_mass * (p_out[i] - k * a)
        a2 = a + 0.5 * dt * k1a
        if a2 < a_lo or a2 > a_hi:
            return i + 1
        k2a = v + 0.5 * dt * k1v
        k2v = inv_mass * (_patch_value(coef_p, a_grid, phi_grid, a2, ph_mid) - k * a2)
        a3 = a + 0.5 * dt * k2a
        if a3 < a_lo or a3 > a_hi:
            return i + 1
        k3a = v + 0.5 * dt * k2v
        k3v = inv_mass * (_patch_value(coef_p, a_grid, phi_grid, a3, ph_mid) - k * a3)
        a4 = a + dt * k3a
        if a4 < a_lo or a4 > a_hi or ph_end < f_lo or ph_end > f_hi:
            return i + 1
        k4a = v + dt * k3v
        k4v = inv_mass * (_patch_value(coef_p, a_grid, phi_grid, a4, ph_end) - k * a4)
        a = a + dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return -1


def simulate_surrogate(schedule: ControlSchedule, t_f: float | None = None,
                       surface: StationarySurface | None = None,
                       params: SystemParams | None = None, a0: float | None = None,
                       dt: float | None = None) -> PistonTrajectory:
    """Piston-only integration with the interpolated stationary pressure.

    Fixed-step RK4 on the same time grid as :func:`simulate_exact`. ``a0``
    defaults to the surface equilibrium at phi(0).
    """
    if surface is None:
        raise ValueError("surrogate mode needs a stationary surface")
    params = params or SystemParams()
    t_f = _resolve_tf(schedule, t_f)
    n, dt = _steps(t_f, params.dt_real if dt is None else dt)
    if a0 is None:
        a0 = equilibrium_position(float(schedule(0.0)), params, surface)
    out = [np.empty(n + 1) for _ in range(5)]
    has_s = surface.s_values is not None
    coef_s = surface._coef["s"] if has_s else surface._coef["p"]
    bad = _rk4_surrogate(float(a0), 0.0, n, dt, t_f, schedule.coeffs, 1.0 / params.mass_ratio,
                         params.spring_k, surface._coef["p"], coef_s, has_s,
                         surface.a_grid, surface.phi_grid, *out)
    if bad >= 0:
        raise SurfaceRangeError(
            f"surrogate trajectory left the surface near t={bad * dt:.6g} "
            f"({schedule.describe()})")
    a_out, v_out, p_out, s_out, phi_out = out
    if not has_s:
        s_out[:] = np.nan
    times = np.linspace(0.0, t_f, n + 1)
    return PistonTrajectory(times, a_out, v_out, p_out, s_out, phi_out, "surrogate",
                            schedule.derivative(times))
