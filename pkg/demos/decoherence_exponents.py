"""
Decoherence exponents under pi trains
=====================================

Free decay against short pi-pulse trains in an ohmic bath, and the
stabilization interval below which pulses start to help.
"""

import numpy as np

from mwm import Ohmic, PulseSequence, gamma_pi, omega_th, stabilization_interval

sd = Ohmic(alpha=0.1, omega_c=8.0)  # meV
T = 10.0  # K

# the thermalized boson factor peaks at omega_th; pulses must be spaced
# closer than pi / (2 omega_th) to suppress decoherence
print(f"omega_th = {omega_th(sd, T):.4f} meV")
print(f"stabilization interval = {stabilization_interval(sd, T):.4f} ps")

# a 0.2 ps spacing is well above that interval
t = np.linspace(1.05, 2.0, 5)
print("\n t (ps)   free decay   M=1      M=3      M=5")
rows = [gamma_pi(sd, T, (0.0,), t)]
for M in (1, 3, 5):
    seq = PulseSequence.equally_spaced(M, 0.2)
    rows.append(gamma_pi(sd, T, seq.times, t))
for k, tk in enumerate(t):
    print(f"{tk:7.3f}  " + "  ".join(f"{r[k]:8.4f}" for r in rows))

# the same trains packed much tighter
print("\nspacing 0.02 ps, t = 1.2 ps")
print(f"free decay {gamma_pi(sd, T, (0.0,), 1.2):.4f}")
for M in (5, 20, 50):
    seq = PulseSequence.equally_spaced(M, 0.02)
    print(f"M = {M:2d}      {gamma_pi(sd, T, seq.times, 1.2):.4f}")
