"""Check the discrete kernel properties that the stability proof relies on.

For each mesh the rows A_{n-k}^{(n)} must be positive and decreasing in the
lag (A2), bounded below by the averaged continuous kernel (A1), and the
complementary kernels must satisfy their defining identity and a growth bound.
Random meshes only respect the step-ratio limit 7/4.  A mesh that breaks the
limit is also shown: the checks are reported, not raised.

Run with ``python3 demos/kernel_properties.py``.
"""

import numpy as np

from fracbs import mesh_from_points, random_m1_mesh, verify_kernel_properties

rng = np.random.default_rng(7)
for alpha in (0.3, 0.5, 0.7, 0.9):
    meshes = [random_m1_mesh(int(rng.integers(4, 65)), alpha, rng) for _ in range(25)]
    report = verify_kernel_properties(alpha, meshes)
    print(f"alpha = {alpha}: {len(meshes)} meshes, N_q = {report.n_q}, "
          f"failures = {report.n_failed}")

steps = np.array([0.412403, 0.020616, 0.541988, 0.024993])
bad = mesh_from_points(np.concatenate([[0.0], np.cumsum(steps)]), 0.5)
result = verify_kernel_properties(0.5, [bad]).meshes[0]
print("\nmesh with step ratio", f"{np.max(steps[1:] / steps[:-1]):.1f}:")
for msg in result.failures:
    print("  ", msg)
