"""Regret curves, explicit-constant bound diagnostics and seed aggregation."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from ..entropy import RegularizerParams, log_barrier_value, tsallis_shannon_value
from ..errors import ContractError, DimensionError, MissingDataError
from ..graph import CliqueCover
from .config import nt_threshold_met


def pseudo_regret(trace, env) -> np.ndarray:
    """Cumulative pseudo-regret after each round.

    Stochastic and corrupted regimes: sum_s p_s . Delta from the clean means.
    Adversarial: sum_s p_s . l_s minus the best fixed arm's loss on the
    realized prefix, so the curve can decrease.
    """
    if trace.regime != env.regime:
        raise ContractError(f"trace regime {trace.regime!r} does not match environment {env.regime!r}")
    if env.regime == "adversarial":
        return np.cumsum(trace.expected_loss) - np.cumsum(trace.losses, axis=0).min(axis=1)
    return np.cumsum(trace.regret_increment)


def _best_clique_rest(marginals, best_prob, k_star, name):
    if marginals is None or best_prob is None or np.isnan(best_prob).any():
        raise MissingDataError(f"{name} data missing; run with monitors enabled in a stochastic regime")
    # clip the roundoff when V_k* = {i*}
    return np.maximum(marginals[:, k_star] - best_prob, 0.0)


class BoundTerms(NamedTuple):
    constant: float
    other_cliques: float
    best_clique: float
    best_clique_plus: float

    @property
    def total(self) -> float:
        return self.constant + self.other_cliques + self.best_clique + self.best_clique_plus


def bound_terms(traces: Sequence, cover: CliqueCover, best_arm: int) -> BoundTerms:
    """Terms of the explicit-constant regret bound, with expectations replaced by seed averages:

        9K log(NT) + 6 log^2(NT) sum_t sum_{k != k*} sqrt(E p_t(V_k) / t)
        + 2 log(NT) sum_t sqrt(E p_t(V_k* minus i*) / t)
        + 16 sum_t sqrt(E p_t^+(V_k* minus i*) / t)
    """
    if not traces:
        raise ContractError("need at least one trace")
    T = len(traces[0])
    if any(len(tr) != T for tr in traces):
        raise DimensionError("traces have different lengths")
    if T == 0:
        raise ContractError("traces are empty")
    N, K = cover.num_arms, cover.num_cliques
    k_star = int(cover.arm_to_clique[best_arm])
    marg = np.mean([tr.marginals for tr in traces], axis=0)
    rest = np.mean([_best_clique_rest(tr.marginals, tr.best_prob, k_star, "p_t") for tr in traces], axis=0)
    rest_plus = np.mean([_best_clique_rest(tr.plus_marginals, tr.plus_best_prob, k_star, "p_t^+")
                         for tr in traces], axis=0)
    t = np.arange(1, T + 1)
    lg = math.log(N * T)
    others = np.delete(marg, k_star, axis=1)
    return BoundTerms(
        constant=9.0 * K * lg,
        other_cliques=6.0 * lg ** 2 * float(np.sqrt(others / t[:, None]).sum()),
        best_clique=2.0 * lg * float(np.sqrt(rest / t).sum()),
        best_clique_plus=16.0 * float(np.sqrt(rest_plus / t).sum()),
    )


def bound_rhs(traces: Sequence, cover: CliqueCover, best_arm: int) -> float:
    """Total of :func:`bound_terms`. Warns when NT < 3^11, where the constants are not guaranteed."""
    T = len(traces[0]) if traces else 0
    if not nt_threshold_met(cover.num_arms, T):
        warnings.warn(f"NT = {cover.num_arms * T} < 3^11: the bound's constants do not apply", stacklevel=2)
    return bound_terms(traces, cover, best_arm).total


def corner_point(num_arms: int, best_arm: int, gamma: float) -> np.ndarray:
    """gamma on every arm except ``best_arm``, which takes the rest."""
    p = np.full(num_arms, gamma)
    p[best_arm] = 1.0 - gamma * (num_arms - 1)
    return p


def _full_probs(trace):
    if trace.probs is None:
        raise MissingDataError("penalty diagnostics need full p_t vectors (trace_detail = 'full')")
    return trace.probs


def penalty_diagnostic(trace, params: RegularizerParams, cover: CliqueCover, best_arm: int) -> float:
    """Phi(p^g) - Phi(p_1) + sum_t (1/eta_t - 1/eta_{t-1}) (Psi(p^g) - Psi(p_t)), with 1/eta_0 = 0."""
    probs = _full_probs(trace)
    corner = corner_point(cover.num_arms, best_arm, params.gamma)
    T = len(probs)
    inv_eta = np.array([1.0 / params.eta(t) for t in range(1, T + 1)])
    steps = np.diff(inv_eta, prepend=0.0)
    psi_corner = tsallis_shannon_value(corner, cover, params.alpha)
    psi = np.array([tsallis_shannon_value(p, cover, params.alpha) for p in probs])
    barrier = log_barrier_value(corner, cover, params.beta) - log_barrier_value(probs[0], cover, params.beta)
    return float(barrier + (steps * (psi_corner - psi)).sum())


def penalty_rhs(trace, params: RegularizerParams, cover: CliqueCover, best_arm: int) -> float:
    """beta K log(1/g) + 5 log^2(1/g) sum_t sum_{k != k*} sqrt(p_t(V_k)/t)
    + 2 log(1/g) sum_t sqrt(p_t(V_k* minus i*)/t)."""
    probs = _full_probs(trace)
    T = len(probs)
    k_star = int(cover.arm_to_clique[best_arm])
    lg = math.log(1.0 / params.gamma)
    t = np.arange(1, T + 1)
    marg = np.stack([np.bincount(cover.arm_to_clique, weights=p, minlength=cover.num_cliques) for p in probs])
    rest = np.maximum(marg[:, k_star] - probs[:, best_arm], 0.0)
    others = np.delete(marg, k_star, axis=1)
    return float(params.beta * cover.num_cliques * lg
                 + 5.0 * lg ** 2 * np.sqrt(others / t[:, None]).sum()
                 + 2.0 * lg * np.sqrt(rest / t).sum())


@dataclass
class Aggregate:
    """Per-round mean and population std of cumulative regret across seeds."""

    t: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    table: list

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "mean_regret", "std_regret"])
            for row in zip(self.t.tolist(), self.mean.tolist(), self.std.tolist()):
                writer.writerow([row[0], repr(row[1]), repr(row[2])])

    def write_table_csv(self, path) -> None:
        if not self.table:
            return
        with Path(path).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(self.table[0]))
            writer.writeheader()
            writer.writerows(self.table)


def aggregate(curves: Sequence[np.ndarray], summaries: Sequence = ()) -> Aggregate:
    """Reduce per-seed cumulative regret curves; ``summaries`` fill the table (one row per seed)."""
    if not len(curves):
        raise ContractError("need at least one curve")
    lengths = {len(c) for c in curves}
    if len(lengths) != 1:
        raise DimensionError(f"inconsistent horizons across seeds: {sorted(lengths)}")
    stack = np.asarray(curves, dtype=float)
    table = [{"seed": s.seed, "algorithm": s.algorithm, "regime": s.regime, "horizon": s.horizon,
              "final_regret": s.final_regret, "realized_corruption": s.realized_corruption,
              "violations": s.violations, "max_stability_ratio": s.max_stability_ratio,
              "wall_time": s.wall_time} for s in summaries]
    return Aggregate(np.arange(1, stack.shape[1] + 1), stack.mean(axis=0), stack.std(axis=0), table)


def growth_exponent(horizons, regrets) -> float:
    """Slope of log(regret) against log(T) by least squares; NaN if any regret is not positive."""
    horizons = np.asarray(horizons, dtype=float)
    regrets = np.asarray(regrets, dtype=float)
    if horizons.shape != regrets.shape or horizons.size < 2:
        raise ContractError("need at least two (T, regret) pairs")
    if np.any(regrets <= 0):
        return float("nan")
    slope, _ = np.polyfit(np.log(horizons), np.log(regrets), 1)
    return float(slope)
