"""
Two-stage control optimisation
==============================

Stage 1 scans the quintic's two free values on the surrogate, then polishes
with Nelder-Mead. Stage 2 refines against exact co-simulations; each exact
run takes about a minute, so it only runs with ``--exact``.
"""

import sys

from rabipiston.config import SystemParams
from rabipiston.control import THRESHOLD, optimize_stage1, optimize_stage2
from rabipiston.piston import default_surface

params = SystemParams()
s1 = optimize_stage1(60.0, default_surface(), params)
print(f"stage 1: c1 = {s1.c1:.4f}  c2 = {s1.c2:.4f}  xi2 = {s1.xi2:.2e}  "
      f"({s1.evaluations} surrogate runs)")

if "--exact" in sys.argv:
    if s1.xi2 >= THRESHOLD:
        print("stage 1 misses the threshold: t_f is below the speed limit")
    else:
        s2 = optimize_stage2((s1.c1, s1.c2), 60.0, params)
        print(f"stage 2: c1 = {s2.c1:.4f}  c2 = {s2.c2:.4f}  xi2 = {s2.xi2:.2e}  "
              f"({s2.evaluations} exact runs)")
