"""How many exponentials does the Caputo kernel need?

The history part of the Caputo derivative costs O(n) per step if done
directly.  Replacing the kernel t^(-alpha)/Gamma(1-alpha) on [dt, T] by a sum
of exponentials turns that into O(N_q) per step, and N_q grows only
logarithmically in 1/dt and 1/eps.

Run with ``python3 demos/soe_compression.py``.
"""

import numpy as np

from fracbs import build_soe, soe_max_error

alpha = 0.5
print(" eps      dt      N_q   max error / eps")
for eps in (1e-6, 1e-9, 1e-12):
    for dt in (1e-2, 1e-4, 1e-6):
        soe = build_soe(alpha, eps, dt, 1.0)
        print(f"{eps:6.0e} {dt:6.0e} {soe.n_q:6d}   {soe_max_error(soe) / eps:.3f}")

soe = build_soe(alpha, 1e-9, 1e-4, 1.0)
print("\nsmallest and largest exponents:", np.min(soe.nodes), np.max(soe.nodes))
