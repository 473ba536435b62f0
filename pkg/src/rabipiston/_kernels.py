"""Fused per-grid-point kernels for the split-step propagators.

The piston barrier is evaluated inline (sine ramp only inside |x - a| <= s) so
that a moving piston costs no array allocation per step. The formulas mirror
:mod:`rabipiston.potentials`; tests check that they agree.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _barrier(z, v0, s):
    if z <= -s:
        return 0.0
    if z >= s:
        return v0
    return v0 * 0.5 * (1.0 + np.sin(0.5 * np.pi * z / s))


@njit(cache=True)
def diag_real(psi, x, wall, v0, s, a1, w1, a2, w2, wnl, gs, gc, rabi, r00, r01, r10, r11):
    """psi <- R @ exp(-i[(w1+w2) V_L + w1 V(x-a1) + w2 V(x-a2) + wnl G]) psi.

    The 2x2 matrix R is applied after the phase when ``rabi`` is set.
    """
    n = psi.shape[1]
    wsum = w1 + w2
    for j in range(n):
        u = psi[0, j]
        d = psi[1, j]
        nu = u.real * u.real + u.imag * u.imag
        nd = d.real * d.real + d.imag * d.imag
        pot = wsum * wall[j] + w1 * _barrier(x[j] - a1, v0, s)
        if w2 != 0.0:
            pot += w2 * _barrier(x[j] - a2, v0, s)
        t1 = -(pot + wnl * (gs * nu + gc * nd))
        t2 = -(pot + wnl * (gs * nd + gc * nu))
        u = u * complex(np.cos(t1), np.sin(t1))
        d = d * complex(np.cos(t2), np.sin(t2))
        if rabi:
            u, d = r00 * u + r01 * d, r10 * u + r11 * d
        psi[0, j] = u
        psi[1, j] = d


@njit(cache=True)
def diag_imag(psi, x, wall, v0, s, a, w, gs, gc, rabi_first, r00, r01, r10, r11):
    """Imaginary-time counterpart: exp(-w (V + G)) with R before or after it."""
    n = psi.shape[1]
    for j in range(n):
        u = psi[0, j]
        d = psi[1, j]
        if rabi_first:
            u, d = r00 * u + r01 * d, r10 * u + r11 * d
        nu = u.real * u.real + u.imag * u.imag
        nd = d.real * d.real + d.imag * d.imag
        pot = wall[j] + _barrier(x[j] - a, v0, s)
        u = u * np.exp(-w * (pot + gs * nu + gc * nd))
        d = d * np.exp(-w * (pot + gs * nd + gc * nu))
        if not rabi_first:
            u, d = r00 * u + r01 * d, r10 * u + r11 * d
        psi[0, j] = u
        psi[1, j] = d


@njit(cache=True)
def mix(psi, r00, r01, r10, r11):
    n = psi.shape[1]
    for j in range(n):
        u = psi[0, j]
        d = psi[1, j]
        psi[0, j] = r00 * u + r01 * d
        psi[1, j] = r10 * u + r11 * d


@njit(cache=True)
def density(psi, out):
    for j in range(psi.shape[1]):
        u = psi[0, j]
        d = psi[1, j]
        out[j] = u.real * u.real + u.imag * u.imag + d.real * d.real + d.imag * d.imag
    return out


@njit(cache=True)
def weighted_phase_sum(rho_k, w, theta):
    """sum_m w[m] Re(rho_k[m] exp(i m theta)), the phase built by rotation."""
    step = np.cos(theta) + 1j * np.sin(theta)
    ph = 1.0 + 0.0j
    total = 0.0
    for m in range(rho_k.size):
        total += w[m] * (rho_k[m] * ph).real
        ph *= step
    return total
