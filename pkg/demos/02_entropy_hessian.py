"""The Tsallis-Shannon regularizer: Hessian assembly, its diagonal lower bound,
and the shift alpha needed for convexity."""

import numpy as np

from graphftrl.entropy import (hessian_diag_lower_bound, diag_bound_alpha, tsallis_perspective_min_eig,
                               tsallis_shannon_hessian, tsallis_shannon_hessian_compact)
from graphftrl.graph import CliqueCover

cover = CliqueCover.from_cliques([[0, 1, 2], [3, 4]])
p = np.array([0.05, 0.25, 0.2, 0.3, 0.2])
alpha = diag_bound_alpha(0.05)

H = tsallis_shannon_hessian(p, cover, alpha)
print("alpha =", round(alpha, 3))
print("perspective assembly vs closed form:", np.abs(H - tsallis_shannon_hessian_compact(p, cover, alpha)).max())
gap = H - np.diag(hessian_diag_lower_bound(p, cover))
print("smallest eigenvalue of H - diag bound:", np.linalg.eigvalsh(gap)[0])

# without a shift the two-arm perspective is not convex everywhere
grid = np.arange(1, 100) * 0.01
for a in (0.0, 0.25):
    worst = min(tsallis_perspective_min_eig(np.array([x, y]), a) for x in grid for y in grid)
    print(f"alpha={a}: min eigenvalue over the grid {worst:+.4f}")
