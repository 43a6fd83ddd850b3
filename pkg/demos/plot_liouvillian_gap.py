"""
Critical slowing down in the k=1 sector
=======================================

The slowest eigenvalue of the k=1 band of the laser generator closes with N:
that is the spontaneous breaking of the U(1) symmetry.  Dephasing shifts the
whole band by -eta/8, so it stays open and the symmetry is never broken.
"""

from dptlab import LaserConfig, model_spectrum
from dptlab.models import auto_cutoff, laser_model

eta = 0.2
print(" N     C    |Re l0| eta=0   |Re l0| eta=0.2")
for N in (1, 2, 5, 10, 20):
    cfg = LaserConfig(A=1.25, N=N)
    C = auto_cutoff(cfg).cutoff
    plain = model_spectrum(laser_model(cfg.with_(C=C)), 1, count=1).eigenvalues[0]
    deph = model_spectrum(laser_model(cfg.with_(C=C, eta=eta)), 1, count=1).eigenvalues[0]
    print(f"{N:>2}  {C:>4}    {abs(plain.real):.6f}        {abs(deph.real):.6f}")

# the k=2 band moves four times as far
cfg = LaserConfig(A=1.25, N=5, C=60)
l2 = model_spectrum(laser_model(cfg), 2, count=3).eigenvalues
l2_eta = model_spectrum(laser_model(cfg.with_(eta=eta)), 2, count=3).eigenvalues
print("k=2 shift:", (l2_eta - l2).real, "expected", -eta * 4 / 8)
