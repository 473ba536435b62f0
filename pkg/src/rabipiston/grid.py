"""Periodic 1-D grid and the two-component condensate field."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True, eq=False)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 2 or not self.x_max > self.x_min:
            raise ValueError("grid needs n >= 2 and x_max > x_min")
        dx = (self.x_max - self.x_min) / self.n
        x = self.x_min + dx * np.arange(self.n)
        k = 2 * np.pi * sfft.fftfreq(self.n, dx)
        x.flags.writeable = False
        k.flags.writeable = False
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_params(cls, params) -> "Grid":
        return cls(params.domain[0], params.domain[1], params.n_points)

    @property
    def k_max(self) -> float:
        return np.pi / self.dx

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.x_min, self.x_max, self.n) == (other.x_min, other.x_max, other.n)

    def __hash__(self):
        return hash((self.x_min, self.x_max, self.n))


class SpinorField:
    """Amplitudes (psi_up, psi_down) on a grid, stored as a (2, n) complex array.

    ``data`` is shared, not copied; use :meth:`copy` before handing a field to
    code that mutates it.
    """

    __slots__ = ("grid", "data")

    def __init__(self, grid: Grid, psi_up, psi_down=None):
        if psi_down is None:
            data = np.asarray(psi_up, dtype=complex)
        else:
            data = np.array([psi_up, psi_down], dtype=complex)
        if data.shape != (2, grid.n):
            raise ValueError(f"expected shape (2, {grid.n}), got {data.shape}")
        self.grid = grid
        self.data = data

    @classmethod
    def zeros(cls, grid: Grid) -> "SpinorField":
        return cls(grid, np.zeros((2, grid.n), dtype=complex))

    @property
    def psi_up(self) -> np.ndarray:
        return self.data[0]

    @property
    def psi_down(self) -> np.ndarray:
        return self.data[1]

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.data.copy())

    def density(self) -> np.ndarray:
        """Total density |psi_up|^2 + |psi_down|^2."""
        return (self.data.real**2 + self.data.imag**2).sum(axis=0)

    def spectral(self) -> np.ndarray:
        """Fourier coefficients of both components (unnormalised forward DFT)."""
        return sfft.fft(self.data, axis=1)

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs) -> "SpinorField":
        return cls(grid, sfft.ifft(coeffs, axis=1))

    def boundary_density(self) -> float:
        rho = self.density()
        return float(rho[0] + rho[-1])


def norm(field: SpinorField) -> float:
    """Rectangle-rule integral of the total density (equals 1 for a normalised field)."""
    return float(field.density().sum() * field.grid.dx)


def spectral_norm(field: SpinorField) -> float:
    coeffs = field.spectral()
    g = field.grid
    return float((np.abs(coeffs) ** 2).sum() * g.dx / g.n)


def normalize(field: SpinorField) -> SpinorField:
    nrm = norm(field)
    if not nrm > 0:
        raise ValueError("cannot normalise a field with zero norm")
    return SpinorField(field.grid, field.data / np.sqrt(nrm))


def magnetization(field: SpinorField) -> float:
    """Population imbalance S = int(|psi_up|^2 - |psi_down|^2) dx."""
    d = field.data
    pops = (d.real**2 + d.imag**2).sum(axis=1) * field.grid.dx
    return float(pops[0] - pops[1])


def inner(a: SpinorField, b: SpinorField) -> complex:
    """<a|b> summed over both components."""
    return complex(np.vdot(a.data, b.data) * a.grid.dx)


def box_mode(grid: Grid, a: float, up: float = 1.0, down: float = 1.0) -> SpinorField:
    """sin(pi x / a) on [0, a] with the given spin weights, normalised."""
    x = grid.x
    env = np.where((x > 0) & (x < a), np.sin(np.pi * x / a), 0.0)
    return normalize(SpinorField(grid, up * env, down * env))


def write_field_csv(field: SpinorField, path, header: str = "") -> None:
    """Columns x, re_up, im_up, re_down, im_down."""
    d = field.data
    table = np.column_stack([field.grid.x, d[0].real, d[0].imag, d[1].real, d[1].imag])
    with open(path, "w") as fh:
        if header:
            fh.write(header)
        fh.write("x,re_up,im_up,re_down,im_down\n")
        np.savetxt(fh, table, delimiter=",", fmt="%.17g")


def read_field_csv(path) -> SpinorField:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    if lines[0].replace(" ", "") != "x,re_up,im_up,re_down,im_down":
        raise ValueError(f"{path}: unexpected field header {lines[0]!r}")
    table = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    x = table[:, 0]
    n = len(x)
    dx = x[1] - x[0]
    grid = Grid(float(x[0]), float(x[0] + n * dx), n)
    return SpinorField(grid, table[:, 1] + 1j * table[:, 2], table[:, 3] + 1j * table[:, 4])
