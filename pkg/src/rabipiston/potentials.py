"""Smooth confining potentials: the left wall and the moving piston barrier.

Both are sine ramps of half-width ``s``; the left wall drops from ``v_left`` to
zero around x = 0 and the piston barrier rises from zero to ``v_piston``
around its position a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ._kernels import weighted_phase_sum


@dataclass(frozen=True)
class WallSpec:
    v_left: float = 100.0
    v_piston: float = 10.0
    slope_s: float = 0.1

    def __post_init__(self):
        if not (self.v_left > self.v_piston > 0 and self.slope_s > 0):
            raise ValueError("need v_left > v_piston > 0 and slope_s > 0")

    @classmethod
    def from_params(cls, params) -> "WallSpec":
        return cls(params.v_left, params.v_piston, params.slope_s)


def left_wall(x, spec: WallSpec):
    s = spec.slope_s
    xc = np.clip(x, -s, s)
    return spec.v_left * 0.5 * (1.0 - np.sin(np.pi * xc / (2 * s)))


def piston_barrier(z, spec: WallSpec):
    """Barrier as a function of z = x - a."""
    s = spec.slope_s
    zc = np.clip(z, -s, s)
    return spec.v_piston * 0.5 * (1.0 + np.sin(np.pi * zc / (2 * s)))


def piston_barrier_deriv(z, spec: WallSpec):
    """d/dz of :func:`piston_barrier`; supported on |z| <= s and integrates to v_piston."""
    s = spec.slope_s
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) <= s
    out = np.where(inside, spec.v_piston * np.pi / (4 * s) * np.cos(np.pi * z / (2 * s)), 0.0)
    return out if out.ndim else float(out)


def piston_barrier_deriv_transform(k, spec: WallSpec):
    """int exp(ikz) dV/dz dz, real and even in k.

    Written as V0 b^2 s sinc((|k| - b) s / pi) / (|k| + b) with b = pi/(2s), which
    has no removable singularity at |k| = b.
    """
    s = spec.slope_s
    b = np.pi / (2 * s)
    k = np.abs(np.asarray(k, dtype=float))
    return spec.v_piston * b * b * s * np.sinc((k - b) * s / np.pi) / (k + b)


def total_potential(x, a: float, spec: WallSpec):
    return left_wall(x, spec) + piston_barrier(x - a, spec)


class RampForce:
    """Exact integral of a grid density's trigonometric interpolant against dV(x - a)/dx.

    One real FFT per call. Unlike a rectangle sum it does not see the kinks of
    dV/dx at z = +-s, so it is exact for band-limited densities.
    """

    def __init__(self, grid, spec: WallSpec):
        n = grid.n
        self._x0 = grid.x_min
        self._k1 = 2 * np.pi / (n * grid.dx)
        w = piston_barrier_deriv_transform(self._k1 * np.arange(n // 2 + 1), spec) / n
        w[1:] *= 2.0
        if n % 2 == 0:
            w[-1] *= 0.5
        self._w = w

    def __call__(self, density, a: float) -> float:
        theta = math.remainder(self._k1 * (a - self._x0), 2 * math.pi)
        return float(weighted_phase_sum(sfft.rfft(density), self._w, theta))
