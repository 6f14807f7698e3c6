"""
Time-integrated signals against the first control pulse
=======================================================

With a phonon band on top of the ohmic background, sweeping t1 at fixed
t2 shows the 6WM signal first below and then above the t1-independent
4WM reference.
"""

import numpy as np

from mwm import EnsembleSpec, GaussianOhmic, PulseSequence, sweep_t1

sd = GaussianOhmic(alpha=0.1, omega_c=8.0, alpha_p=0.05, omega_p=13.0, gamma_p=4.0)
template = PulseSequence.weak((0.0, 0.3, 0.6))
grid = np.round(np.arange(0.05, 0.6, 0.05), 12)

c4, c6 = sweep_t1(template, sd, 10.0, EnsembleSpec(5.0), grid)
print(" t1 (ps)   I_4WM        I_6WM        6WM - 4WM")
for x, a, b in zip(grid, c4.intensity, c6.intensity):
    print(f"{x:6.3f}   {a:.4e}   {b:.4e}   {'+' if b > a else '-'}")
