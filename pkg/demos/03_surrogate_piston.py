"""
Piston on the stationary surface
================================

The surrogate integrates only the piston, feeding it the tabulated ground
state pressure P_st(a, phi). It is cheap enough to compare schedules by
the hundred. Here: the plain cubic ramp against a tuned quintic, both
over 60 tau, scored by the terminal error xi^2.
"""

import math

from rabipiston.config import SystemParams
from rabipiston.control import surface_problem, terminal_error
from rabipiston.piston import default_surface, simulate_surrogate
from rabipiston.schedule import ControlSchedule

params = SystemParams()
surface = default_surface()
problem = surface_problem(60.0, surface, params)
print(f"a_eq(0) = {problem.a0:.5f}   a_eq(pi/2) = {problem.a_target:.5f}")

for sched in (ControlSchedule.reference(60.0), ControlSchedule.quintic(60.0, 0.276, 0.049)):
    traj = simulate_surrogate(sched, surface=surface, params=params, a0=problem.a0)
    xi2 = terminal_error(traj, problem.a_target)
    print(f"{sched.describe():45s} a(t_f) = {traj.final_position:.5f}  "
          f"v(t_f) = {traj.final_velocity:+.2e}  xi2 = {xi2:.3g}")

# %%
# A quarter period of the bare spring-mass oscillation, for scale.
print(f"quarter period: {0.5 * math.pi / params.omega:.1f} tau")
