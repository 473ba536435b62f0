"""
Trial-model pressure shift
==========================

With the Rabi field along z the trial state fills the lower spin level
partially (weak splitting) or completely (strong splitting). The switch
happens at Delta_cr = 3 g / (2 a), and the extra pressure from the coupling
changes form there. Sweep a and print the shift for a few splittings.
"""

import numpy as np

from rabipiston.trial import TrialParams, shift_sweep, trial_occupation

g_s = 5.0
a_values = np.linspace(0.5, 4.0, 8)
deltas = [1.0, 2.0, 5.0]

shift = {(a, d): s for a, d, s in shift_sweep(a_values, deltas, g_s)}
print("a      " + "".join(f"Delta={d:<6g}" for d in deltas))
for a in a_values:
    print(f"{a:5.2f}  " + "".join(f"{shift[(float(a), d)]:<12.5f}" for d in deltas))

# %%
# Occupation of the lower level: saturates at 1 once a > 3 g / (2 Delta).
for d in deltas:
    occ = [trial_occupation(TrialParams(g_s, d, a)) for a in a_values]
    print(f"Delta={d:g}: " + " ".join(f"{n:.3f}" for n in occ))
