"""Monitors and bound diagnostics on a short run with the full trace."""

import warnings

from graphftrl.harness import config_from_dict, run_experiment
from graphftrl.harness.diagnostics import bound_rhs, penalty_diagnostic, penalty_rhs, pseudo_regret

cfg = config_from_dict({
    "horizon": 2000, "seeds": [0], "trace_detail": "full",
    "graph": {"generator": "disjoint_cliques", "sizes": [2, 2, 2, 2, 2]},
    "cover": {"source": "blocks", "sizes": [2, 2, 2, 2, 2]},
    "environment": {"regime": "stochastic", "means": [0.25] + [0.5] * 9},
})
result = run_experiment(cfg, 0)
s, tr = result.summary, result.trace
print(f"regret {s.final_regret:.1f}; max p+/p ratio {s.max_stability_ratio:.3f}; "
      f"max shifted-loss excess {s.max_shifted_loss_excess:.1e}; violations {s.violations}")
print("pseudo-regret at t=500, 1000, 2000:", pseudo_regret(tr, cfg.make_environment())[[499, 999, 1999]].round(1))

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    print("explicit bound:", round(bound_rhs([tr], cfg.cover, tr.best_arm), 1))
    for w in caught:
        print("  warning:", w.message)

params = cfg.params()
print("penalty term", round(penalty_diagnostic(tr, params, cfg.cover, tr.best_arm), 1),
      "<= its bound", round(penalty_rhs(tr, params, cfg.cover, tr.best_arm), 1))
