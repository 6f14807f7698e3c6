"""
Exact single-mode check and a parameter round trip
==================================================

The phase-cycled truncated-Fock evolution reproduces every amplitude of
the nine-order expansion. Then noisy 4WM and 6WM sweeps are fitted
simultaneously to recover the ohmic coupling and cutoff.
"""

import math

import numpy as np

from mwm import (FOUR_WAVE, SIX_WAVE, Dataset, FitProblem, PulseSequence, SingleMode, solve)
from mwm.fit import model_curves
from mwm.oracle import compare_weak_orders

sd = SingleMode(g_sq=8.0, omega_p=13.0)
for T in (0.0, 100.0):
    report, stray = compare_weak_orders(sd, T, (math.pi / 2,) * 3, (0.0, 0.1, 0.25), 0.4)
    print(f"T = {T:5.1f} K: worst relative deviation {max(report.values()):.1e}, "
          f"stray orders {len(stray)}")

seq = PulseSequence.weak((0.0, 0.3, 0.6))
grid = np.round(np.arange(0.05, 0.56, 0.05), 12)


def problem(y4, y6):
    ds = [Dataset(FOUR_WAVE, "t1", grid, y4, seq), Dataset(SIX_WAVE, "t1", grid, y6, seq)]
    return FitProblem(ds, ("alpha", "omega_c"), {"alpha": (0.02, 0.5), "omega_c": (2.0, 16.0)},
                      {"alpha": 0.2, "omega_c": 5.0}, {"T": 10.0, "delta_B": 5.0})


y4, y6 = model_curves(problem(grid, grid), [0.1, 8.0])
rng = np.random.default_rng(1)
noisy = [y * (1 + 0.01 * rng.standard_normal(y.size)) for y in (y4, y6)]
print()
print(solve(problem(*noisy)).report())
