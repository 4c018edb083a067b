"""The learner written out by hand: solve, sample, observe the neighborhood, estimate, update."""

import numpy as np

from graphftrl.graph import block_cover, disjoint_cliques
from graphftrl.learner import (LearnerState, default_params, estimate_losses, make_feedback, next_distribution,
                               sample_arm, update)

sizes = [2, 2, 2]
graph, cover = disjoint_cliques(sizes), block_cover(sizes)
means = np.array([0.2, 0.5, 0.5, 0.5, 0.5, 0.5])
T = 3000
rng = np.random.default_rng(0)

state = LearnerState.initial(cover, default_params(graph.num_arms, T))
regret = 0.0
for t in range(1, T + 1):
    p = next_distribution(state)
    arm = sample_arm(p, rng)
    losses = (rng.random(graph.num_arms) < means).astype(float)
    est = estimate_losses(make_feedback(graph, arm, losses), p, cover)
    state = update(state, est)
    regret += p @ means - means.min()
    if t in (1, 10, 100, 1000, T):
        print(f"t={t:>5} p(best)={p[0]:.3f} clique marginals={np.round(np.add.reduceat(p, [0, 2, 4]), 3)} "
              f"regret={regret:.1f}")
