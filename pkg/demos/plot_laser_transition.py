"""
The laser transition with and without dephasing
================================================

The rescaled photon number of the weak-saturation laser develops an elbow at
A = Gamma as N grows.  Adding the dephasing jump sqrt(eta/4) a a^dag leaves the
steady state untouched, so the curve and its elbow survive.
"""

import numpy as np

from dptlab import LaserConfig, build, model_steady_state, number
from dptlab.models import auto_cutoff, laser_model
from dptlab.spectral import criticality_witness

# a coarse grid keeps this quick; the preset uses steps of 0.05
grid = np.round(np.arange(1, 21) * 0.1, 12)

for N in (1, 2, 5):
    witness = criticality_witness(lambda A: build(LaserConfig(A=A, N=N)), grid, number, scale=1 / N)
    print(f"N={N:>2}: <n>/N at A=2 is {witness.values[-1]:.3f}; "
          f"max |d2/dA2| = {witness.magnitude:.2f} at A = {witness.location:.2f}")

# the same steady state with dephasing switched on
cfg = LaserConfig(A=1.25, N=5)
C = auto_cutoff(cfg).cutoff
for eta in (0.0, 0.2, 1.0):
    rho = model_steady_state(laser_model(cfg.with_(C=C, eta=eta)))
    n = np.trace(np.asarray(rho) @ number(C)).real
    print(f"eta={eta:<4} <n>/N = {n / cfg.N:.12f}")
