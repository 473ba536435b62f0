"""
Ground states behind a piston
=============================

Relax a two-component condensate in imaginary time for a few piston
positions and Rabi angles, then read off the energy, the pressure on the
piston and the magnetisation. With the field along z the hard-wall trial
model is printed alongside for comparison.
"""

import math

from rabipiston.config import SystemParams
from rabipiston.grid import magnetization
from rabipiston.observables import pressure_exact
from rabipiston.gpe import ground_state
from rabipiston.trial import TrialParams, trial_pressure

params = SystemParams(n_points=1024)    # a coarser grid keeps this demo quick

# %%
# At phi = 0 the Rabi field is along z: the condensate polarises and S < 0.
# At phi = pi/2 it points along y and S falls to zero; the pressure drops.
print(f"{'a':>5} {'phi/pi':>7} {'E_gs':>9} {'P_st':>8} {'S':>8} {'P_trial':>8}")
warm = None
for phi in (0.0, math.pi / 4, math.pi / 2):
    for a in (1.6, 1.7, 1.8):
        gs = ground_state(a, phi, params, initial=warm)
        warm = gs.field
        p = pressure_exact(gs.field, a, params)
        # the trial state is built for a field along z only
        hard = f"{trial_pressure(TrialParams(params.g_s, params.delta, a)):8.4f}" if phi == 0 else ""
        print(f"{a:5.2f} {phi / math.pi:7.2f} {gs.energy:9.5f} {p:8.5f} "
              f"{magnetization(gs.field):8.4f} {hard}")

# %%
# The trial pressure assumes infinitely high walls. The finite piston barrier
# lets the condensate leak under the piston, so the real pressure is lower.
