"""
Live condensate versus surrogate
================================

Run the piston against the evolving condensate (about a minute at the
default grid) and against the surface, then split the work done on the
piston into its stationary and non-stationary parts.
"""

import numpy as np

from rabipiston.config import SystemParams
from rabipiston.control import exact_problem, terminal_error
from rabipiston.observables import work_report
from rabipiston.piston import default_surface, simulate_exact, simulate_surrogate
from rabipiston.schedule import ControlSchedule

params = SystemParams()
surface = default_surface()
problem = exact_problem(60.0, params)
sched = ControlSchedule.quintic(60.0, 0.276, 0.049)

exact = simulate_exact(sched, params=params, a0=problem.a0)
surrogate = simulate_surrogate(sched, surface=surface, params=params, a0=problem.a0)
print(f"exact     xi2 = {terminal_error(exact, problem.a_target):.3g}")
print(f"surrogate xi2 = {terminal_error(surrogate, problem.a_target):.3g}")
print(f"max |a_exact - a_surrogate| = {np.max(np.abs(exact.a - surrogate.a)):.2e}")

# %%
# Work ledger. The closure line checks the bookkeeping: it should be close to zero.
print(work_report(exact, surface).to_text(), end="")

# %%
# The magnetisation trails the rotating Rabi field slightly.
for t in (0, 15, 30, 45, 60):
    i = int(round(t / 60.0 * (len(exact.times) - 1)))
    print(f"t = {t:2d}  a = {exact.a[i]:.5f}  S = {exact.s_mag[i]:+.4f}  P = {exact.p[i]:.4f}")
