"""One FTRL step solved by damped Newton, checked against a grid-and-bracket search."""

import numpy as np

from graphftrl.graph import CliqueCover
from graphftrl.learner import default_params
from graphftrl.solver import brute_force_solve, ftrl_objective, ftrl_solve

cover = CliqueCover.from_cliques([[0, 1], [2]])
params = default_params(3, 1000)
L = np.array([40.0, 55.0, 80.0])

for t in (1, 100, 10_000):
    rep = ftrl_solve(L, cover, params, t)
    ref = brute_force_solve(L, cover, params, t)
    print(f"t={t:>6}: p={np.round(rep.solution, 6)} iters={rep.iterations} kkt={rep.kkt_residual:.1e} "
          f"|p - brute|={np.abs(rep.solution - ref).max():.1e} "
          f"objective={ftrl_objective(rep.solution, L, cover, params, t):.4f}")
