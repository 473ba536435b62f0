"""Pressure on the piston and the decomposition of the piston work.

Work bookkeeping for a run from 0 to t_f::

    W_p      = int v P dt                      (exact pressure)
    W_p,st   = int v P_st(a, phi) dt           (stationary pressure)
    dW_p     = W_p - W_p,st
    E_st     = E_gs(a(t_f), phi(t_f)) - E_gs(a(0), phi(0))
    W_phi,st = int phi' dE_gs/dphi dt

and the identity W_phi,st = W_p + E_st - dW_p ties the two routes together.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.integrate import trapezoid

from .config import SystemParams
from .gpe import ground_state
from .grid import SpinorField
from .potentials import RampForce, WallSpec


def pressure_exact(field: SpinorField, a: float, params: SystemParams) -> float:
    """int |Psi|^2 dV(x - a)/dx dx in units rho, integrated spectrally (see RampForce)."""
    return RampForce(field.grid, WallSpec.from_params(params))(field.density(), a)


def pressure_stationary(a: float, phi: float, params: SystemParams, tol: float = 1e-10,
                        initial: SpinorField | None = None, return_state: bool = False):
    """Ground-state pressure and energy at fixed (a, phi).

    Returns ``(P_st, E_gs)``, or ``(P_st, E_gs, GroundStateResult)`` with
    ``return_state``.
    """
    gs = ground_state(a, phi, params, tol=tol, initial=initial)
    p = pressure_exact(gs.field, a, params)
    return (p, gs.energy, gs) if return_state else (p, gs.energy)


@dataclass(frozen=True)
class WorkLedger:
    w_p: float
    w_p_st: float
    dw_p: float
    e_st: float
    w_phi_st: float

    @property
    def closure(self) -> float:
        """W_phi,st - (W_p + E_st - dW_p); zero up to quadrature error."""
        return self.w_phi_st - (self.w_p + self.e_st - self.dw_p)

    def to_text(self, header: str = "") -> str:
        lines = [f"{k} = {v:.12g}" for k, v in asdict(self).items()]
        lines.append(f"closure = {self.closure:.12g}")
        return header + "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WorkLedger":
        values = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if "=" in line:
                k, v = (s.strip() for s in line.split("=", 1))
                values[k] = float(v)
        return cls(**{f.name: values[f.name] for f in fields(cls)})


def work_report(trajectory, surface) -> WorkLedger:
    """Work decomposition of a completed run using the stationary surface.

    Raises :class:`rabipiston.piston.SurfaceRangeError` when the trajectory
    leaves the tabulated (a, phi) range.
    """
    t = trajectory.times
    a, v, p, phi = trajectory.a, trajectory.v, trajectory.p, trajectory.phi
    surface.check_covers(a, phi)
    p_st, e_gs = surface.interpolate(a, phi)
    de_dphi = surface.interpolate_derivative(a, phi, "phi")
    dphi = trajectory.dphi if trajectory.dphi is not None else np.gradient(phi, t, edge_order=2)

    w_p = trapezoid(v * p, t)
    w_p_st = trapezoid(v * p_st, t)
    e_st = e_gs[-1] - e_gs[0]
    w_phi_st = trapezoid(dphi * de_dphi, t)
    return WorkLedger(float(w_p), float(w_p_st), float(w_p - w_p_st), float(e_st),
                      float(w_phi_st))
