"""Loss generators: stochastic, adversarial patterns and budgeted corruption."""

import numpy as np

from graphftrl.environments import (AdversarialEnvironment, AdversarialSpec, CorruptionSpec, StochasticEnvironment,
                                    StochasticSpec, gaps)
from graphftrl.graph import block_cover

means = [0.3, 0.5, 0.5, 0.6]
spec = StochasticSpec(np.array(means))
print("gaps:", gaps(spec, block_cover([2, 2])))

rng = np.random.default_rng(3)
env = StochasticEnvironment(spec, CorruptionSpec(budget=5, strategy="flip_best"))
used = 0.0
for t in range(1, 11):
    clean, final, consumed = env.gen_round(t, rng)
    used += consumed
    print(t, clean, "->", final, "corruption used so far", used)

adv = AdversarialEnvironment(AdversarialSpec("alternating", 4, block=3, noise="none", low=0.25, high=0.75))
print("alternating means:", [adv.spec.means_at(t)[[0, 3]].tolist() for t in range(1, 8)])
