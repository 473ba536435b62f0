"""Variational box-mode model of a Rabi-coupled condensate behind a hard piston.

Both components occupy the lowest box mode on [0, a]; the only free parameter
is the spin-down fraction n. With N absorbed into g_s (N = 1)::

    E(n) = pi^2/(2a^2) + 3g_s/(4a) + delta/2 - (3g_s/(2a) + delta) n + (3g_s/(2a)) n^2

Minimising over n in [0, 1] gives the closed forms below. Only g_c = 0 is
covered. Used as a test oracle and for qualitative comparison with the
finite-barrier numerics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrialParams:
    g_s: float
    delta: float
    a: float

    def __post_init__(self):
        if not self.g_s > 0:
            raise ValueError("g_s must be positive")
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.delta >= 0:
            raise ValueError("delta must be non-negative")

    @property
    def delta_cr(self) -> float:
        """Rabi frequency above which the condensate is fully spin-down."""
        return 1.5 * self.g_s / self.a

    @property
    def a_cr(self) -> float:
        """Box length above which the condensate is fully spin-down (inf at delta = 0)."""
        return math.inf if self.delta == 0 else 1.5 * self.g_s / self.delta


def energy_of_occupation(p: TrialParams, n_down) -> np.ndarray | float:
    """Trial energy as a function of the spin-down fraction."""
    a, g, d = p.a, p.g_s, p.delta
    quad = 1.5 * g / a
    return (math.pi**2 / (2 * a * a) + 0.75 * g / a + 0.5 * d
            - (quad + d) * np.asarray(n_down) + quad * np.asarray(n_down) ** 2)


def trial_occupation(p: TrialParams) -> float:
    """Stationary spin-down fraction, 1/2 + a delta/(3 g_s) clipped to 1."""
    return min(0.5 + p.a * p.delta / (3 * p.g_s), 1.0)


def magnetization(p: TrialParams) -> float:
    """(N_up - N_down)/N at the stationary occupation."""
    return 1.0 - 2.0 * trial_occupation(p)


def trial_energy(p: TrialParams) -> float:
    a, g, d = p.a, p.g_s, p.delta
    base = math.pi**2 / (2 * a * a) + 3 * g / (8 * a)
    if d < p.delta_cr:
        return base - a * d * d / (6 * g)
    return base + 3 * g / (8 * a) - 0.5 * d


def trial_pressure_shift(p: TrialParams) -> float:
    """P(a, delta) - P(a, 0), the exact a-derivative of the energy branches.

    delta^2/(6 g_s) while partially polarised, 3 g_s/(8 a^2) once fully
    polarised; the two agree at delta_cr.
    """
    if p.delta < p.delta_cr:
        return p.delta**2 / (6 * p.g_s)
    return 3 * p.g_s / (8 * p.a**2)


def trial_pressure(p: TrialParams) -> float:
    """Total stationary pressure -dE/da of the trial state."""
    a, g = p.a, p.g_s
    return math.pi**2 / a**3 + 3 * g / (8 * a * a) + trial_pressure_shift(p)


def shift_sweep(a_values, deltas, g_s: float):
    """Rows (a, delta, shift) covering every pair of the two inputs."""
    return [(float(a), float(d), trial_pressure_shift(TrialParams(g_s, float(d), float(a))))
            for d in deltas for a in a_values]
