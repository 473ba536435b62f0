"""
Speed limit versus piston mass
==============================

For each protocol time find the best surrogate error. The shortest time that
still reaches xi^2 < 1e-4 is the speed limit. It grows like the square root
of the piston mass, because the piston cannot be steered faster than its own
oscillation period.
"""

import numpy as np

from rabipiston.config import SystemParams
from rabipiston.piston import default_surface
from rabipiston.control import speed_limit_scan

surface = default_surface()
limits = {}
for mass, times in ((1000.0, np.arange(44.0, 62.0, 2.0)), (250.0, np.arange(20.0, 34.0, 2.0))):
    params = SystemParams(mass_ratio=mass)
    rows, t_fc = speed_limit_scan(times, params, surface)
    limits[mass] = t_fc
    print(f"mass {mass:g}: t_fc = {t_fc}")
    for t_f, xi2, c1, c2 in rows:
        print(f"   t_f = {t_f:6.2f}  xi2 = {xi2:.2e}  (c1, c2) = ({c1:.3f}, {c2:.3f})")

print(f"ratio = {limits[1000.0] / limits[250.0]:.3f}  (sqrt(4) = 2)")
