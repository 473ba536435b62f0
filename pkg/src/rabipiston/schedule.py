"""Polynomial control schedules phi(t) for the Rabi-field angle.

Every schedule satisfies phi(0) = 0, phi(t_f) = pi/2 and phi'(0) = phi'(t_f) = 0.
The quintic kind additionally passes through pi*c1 at t_f/3 and pi*c2 at 2t_f/3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

REFERENCE = "reference-cubic"
QUINTIC = "constrained-quintic"


def _quintic_coeffs(c1: float, c2: float) -> np.ndarray:
    """Ascending coefficients in u = t/t_f."""
    rows = [
        [1, 0, 0, 0, 0, 0],                       # phi(0)
        [1, 1, 1, 1, 1, 1],                       # phi(1)
        [0, 1, 0, 0, 0, 0],                       # phi'(0)
        [0, 1, 2, 3, 4, 5],                       # phi'(1)
        [(1 / 3) ** n for n in range(6)],
        [(2 / 3) ** n for n in range(6)],
    ]
    rhs = [0.0, np.pi / 2, 0.0, 0.0, np.pi * c1, np.pi * c2]
    m = np.array(rows, dtype=float)
    if abs(np.linalg.det(m)) < 1e-12:
        raise np.linalg.LinAlgError("singular interpolation system")
    return np.linalg.solve(m, rhs)


@dataclass(frozen=True)
class ControlSchedule:
    kind: str
    t_f: float
    c1: float | None = None
    c2: float | None = None
    coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.t_f > 0:
            raise ValueError("t_f must be positive")
        if self.kind == REFERENCE:
            coeffs = np.array([0.0, 0.0, 1.5 * np.pi, -np.pi])
        elif self.kind == QUINTIC:
            if self.c1 is None or self.c2 is None:
                raise ValueError("quintic schedule needs c1 and c2")
            coeffs = _quintic_coeffs(self.c1, self.c2)
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def reference(cls, t_f: float) -> "ControlSchedule":
        return cls(REFERENCE, t_f)

    @classmethod
    def quintic(cls, t_f: float, c1: float, c2: float) -> "ControlSchedule":
        return cls(QUINTIC, t_f, float(c1), float(c2))

    def __call__(self, t):
        return phi_eval(self, t)

    def derivative(self, t):
        u = np.asarray(t, dtype=float) / self.t_f
        return P.polyval(u, P.polyder(self.coeffs)) / self.t_f

    def describe(self) -> str:
        if self.kind == REFERENCE:
            return f"{self.kind} t_f={self.t_f:g}"
        return f"{self.kind} t_f={self.t_f:g} c1={self.c1:g} c2={self.c2:g}"


def phi_eval(schedule: ControlSchedule, t):
    u = np.asarray(t, dtype=float) / schedule.t_f
    if np.any(u < -1e-12) or np.any(u > 1 + 1e-12):
        raise ValueError("t outside [0, t_f]")
    out = P.polyval(u, schedule.coeffs)
    return float(out) if np.ndim(out) == 0 else out
