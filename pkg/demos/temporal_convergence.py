"""Temporal convergence on a problem with a weak initial singularity.

The exact solution behaves like t^alpha near t = 0, so a uniform mesh loses
accuracy there.  Grading the mesh with gamma = 2/alpha puts enough points near
the origin to recover second order; gamma = 1 shows the degraded rate.

Run with ``python3 demos/temporal_convergence.py``.
"""

from fracbs import convergence_study, example1

ALPHA = 0.5
M = 256  # fine enough that the spatial error stays out of the way

for gamma, label in ((1.0, "uniform"), (2.0 / ALPHA, "graded")):
    print(f"{label} mesh, gamma = {gamma:g}")
    rows = convergence_study(example1(ALPHA), 16, M, 4, "time", gamma)
    for row in rows:
        rate = "" if row.rate is None else f"{row.rate:6.3f}"
        print(f"  N = {row.size:5d}   E = {row.error:.4e}   rate {rate}")
    print()
