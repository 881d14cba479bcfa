"""Optimal controls, switch-moment detection, and segment diagnostics.

Shows the doubling feedback's closed-form segment, the detection of the
moment where two modes reach equal relative phase speed, the equalizing
rotation, and the sign flip a needle event produces in the local
exponent.
"""

import numpy as np

from ipflab import control, diagnostics

# closed-form segment under v = -2 x(tau)
t = np.linspace(0.0, 0.5, 6)
x = control.segment_trajectory(1.0, 1.0, t)
print("segment x(t) =", x.round(4).tolist())

# switch moment of two modes with crossing relative speeds
grid = np.arange(0.0, 1.0, 1e-4)
modes = np.column_stack([2.0 - np.exp(0.5 * grid), 2.0 - np.exp(-grid)])
hits = control.detect_dp(grid, modes)
taus = [h["tau"] for h in hits if h.get("tau")]
print(f"switch moment detected at tau = {taus[0]:.6f}")

# consolidation rotation equalizes while preserving the norm
out = control.consolidate_rotation(1.0, 3.0)
print(f"rotation phi = {out['phi']:.5f}, equalized pair = "
      f"({out['z_hat'][0]:.5f}, {out['z_hat'][1]:.5f})")

# needle event: the exponent flips sign across the switch
t1 = np.linspace(0, 1, 300)
t2 = np.linspace(1, 2, 300)[1:]
trace = np.concatenate([np.exp(t1), np.exp(1.0) * np.exp(-(t2 - 1.0))])
rep = diagnostics.diagnose_segments(np.concatenate([t1, t2]), trace, [1.0])
print(f"exponents per segment: {[round(s, 4) for s in rep.lce_per_segment]}")
print(f"classification: {rep.classification}")
print(f"production rate of diag(1,2,3): {diagnostics.pfr(np.diag([1., 2., 3.]))}")
