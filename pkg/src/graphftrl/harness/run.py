"""Single runs and seed sweeps of the learner/environment interaction loop."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from ..baselines import MabState, mab_estimate, mab_next_distribution, mab_update
from ..errors import GraphFTRLError
from ..learner import (LearnerState, estimate_losses, make_feedback, next_distribution, plus_iterate,
                       sample_arm, update)
from .config import ExperimentConfig
from .diagnostics import pseudo_regret

log = logging.getLogger(__name__)

STABILITY_RATIO = 7.0 / 3.0
STABILITY_SLACK = 1e-6
SHIFTED_LOSS_SLACK = 1e-9
STREAMS = {"sampling": 0, "environment": 1}


def rng_streams(seed: int) -> dict:
    """Independent generators per run component, derived from one seed."""
    return {name: np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key,))))
            for name, key in STREAMS.items()}


@dataclass(frozen=True)
class TraceRecord:
    t: int
    arm: int
    loss: float
    clean_loss: float
    marginals: np.ndarray
    plus_marginals: Optional[np.ndarray]
    regret_increment: float
    consumed: float


@dataclass
class Trace:
    """Columnar per-round log. Row ``r`` holds round ``t = r + 1``.

    ``best_prob`` is p_t of the best arm (stochastic regimes only, else NaN).
    ``losses`` keeps the final loss vectors in memory; ``probs`` and
    ``plus_probs`` are filled only in full detail mode.
    """

    regime: str
    algorithm: str
    best_arm: int
    t: np.ndarray
    arm: np.ndarray
    loss: np.ndarray
    clean_loss: np.ndarray
    marginals: np.ndarray
    expected_loss: np.ndarray
    regret_increment: np.ndarray
    consumed: np.ndarray
    best_prob: np.ndarray
    losses: np.ndarray
    plus_marginals: Optional[np.ndarray] = None
    plus_best_prob: Optional[np.ndarray] = None
    est_inner: Optional[np.ndarray] = None
    plus_est_inner: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    plus_probs: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.t)

    def record(self, row: int) -> TraceRecord:
        return TraceRecord(
            int(self.t[row]), int(self.arm[row]), float(self.loss[row]), float(self.clean_loss[row]),
            self.marginals[row], None if self.plus_marginals is None else self.plus_marginals[row],
            float(self.regret_increment[row]), float(self.consumed[row]))

    def records(self) -> Iterator[TraceRecord]:
        return (self.record(r) for r in range(len(self)))

    def truncate(self, rows: int) -> None:
        for name, value in vars(self).items():
            if isinstance(value, np.ndarray):
                setattr(self, name, value[:rows])


@dataclass
class RunSummary:
    seed: int
    algorithm: str
    regime: str
    horizon: int
    rounds_completed: int
    final_regret: float
    realized_corruption: float
    violations: int = 0
    stability_violations: int = 0
    shifted_loss_violations: int = 0
    max_stability_ratio: float = float("nan")
    max_shifted_loss_excess: float = float("nan")
    diagnostics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    failed_round: Optional[int] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failed_round is None and self.violations == 0


@dataclass
class RunResult:
    trace: Trace
    summary: RunSummary


def _allocate(config: ExperimentConfig, env, plus: bool) -> Trace:
    T, N, K = config.horizon, config.num_arms, config.cover.num_cliques
    full = config.trace_detail == "full"
    best = env.spec.best_arm if env.regime != "adversarial" else -1
    nan = np.full(T, np.nan)
    return Trace(
        regime=env.regime, algorithm=config.algorithm, best_arm=best,
        t=np.arange(1, T + 1), arm=np.zeros(T, dtype=np.int64), loss=np.zeros(T), clean_loss=np.zeros(T),
        marginals=np.zeros((T, K)), expected_loss=np.zeros(T), regret_increment=np.zeros(T),
        consumed=np.zeros(T), best_prob=nan.copy(), losses=np.zeros((T, N)),
        plus_marginals=np.zeros((T, K)) if plus else None,
        plus_best_prob=nan.copy() if plus else None,
        est_inner=np.zeros(T) if plus else None,
        plus_est_inner=np.zeros(T) if plus else None,
        probs=np.zeros((T, N)) if full else None,
        plus_probs=np.zeros((T, N)) if full and plus else None,
    )


def run_experiment(config: ExperimentConfig, seed: int) -> RunResult:
    """Play ``config.horizon`` rounds with one seed; monitors run every round when enabled.

    Solver or learner errors stop the run; the failing round is recorded in the
    summary and the trace is cut to the completed rounds.
    """
    started = time.perf_counter()
    streams = rng_streams(seed)
    env = config.make_environment()
    env.reset()
    graph, cover = config.graph, config.cover
    labels, K = cover.arm_to_clique, cover.num_cliques
    graph_algo = config.algorithm == "graph_ftrl"
    plus = graph_algo and config.monitors.needs_plus
    trace = _allocate(config, env, plus)
    stochastic = env.regime != "adversarial"
    gaps = env.means - env.means.min() if stochastic else None
    best = trace.best_arm

    if graph_algo:
        state = LearnerState.initial(cover, config.params())
    else:
        state = MabState.initial(config.num_arms, config.params().eta_schedule)

    summary = RunSummary(seed, config.algorithm, env.regime, config.horizon, 0, 0.0, 0.0)
    max_ratio = 0.0
    max_excess = -np.inf
    row = 0
    try:
        for t in range(1, config.horizon + 1):
            row = t - 1
            p = next_distribution(state) if graph_algo else mab_next_distribution(state)
            arm = sample_arm(p, streams["sampling"])
            clean, final, consumed = env.gen_round(t, streams["environment"])
            if graph_algo:
                est = estimate_losses(make_feedback(graph, arm, final), p, cover)
                state = update(state, est)
            else:
                est = mab_estimate(arm, float(final[arm]), p)
                state = mab_update(state, est)

            marg = np.bincount(labels, weights=p, minlength=K)
            trace.arm[row] = arm
            trace.loss[row] = final[arm]
            trace.clean_loss[row] = clean[arm]
            trace.marginals[row] = marg
            trace.expected_loss[row] = p @ final
            trace.consumed[row] = consumed
            trace.losses[row] = final
            if stochastic:
                trace.regret_increment[row] = p @ gaps
                trace.best_prob[row] = p[best]
            if trace.probs is not None:
                trace.probs[row] = p

            if plus:
                p_plus = plus_iterate(state)
                marg_plus = np.bincount(labels, weights=p_plus, minlength=K)
                inner, inner_plus = p @ est, p_plus @ est
                trace.plus_marginals[row] = marg_plus
                trace.est_inner[row] = inner
                trace.plus_est_inner[row] = inner_plus
                if stochastic:
                    trace.plus_best_prob[row] = p_plus[best]
                if trace.plus_probs is not None:
                    trace.plus_probs[row] = p_plus
                ratio = float(np.max(marg_plus / marg))
                excess = inner_plus - inner
                max_ratio = max(max_ratio, ratio)
                max_excess = max(max_excess, excess)
                if config.monitors.stability_ratio and ratio > STABILITY_RATIO + STABILITY_SLACK:
                    summary.stability_violations += 1
                    log.warning("seed %d round %d: stability ratio %.6f", seed, t, ratio)
                if config.monitors.shifted_loss and excess > SHIFTED_LOSS_SLACK:
                    summary.shifted_loss_violations += 1
                    log.warning("seed %d round %d: shifted-loss excess %.3e", seed, t, excess)
            summary.rounds_completed = t
    except GraphFTRLError as exc:
        summary.failed_round = row + 1
        summary.error = f"{type(exc).__name__}: {exc}"
        log.error("seed %d aborted at round %d: %s", seed, row + 1, exc)
        trace.truncate(summary.rounds_completed)

    if not stochastic and len(trace):
        trace.regret_increment[:] = np.diff(pseudo_regret(trace, env), prepend=0.0)
    summary.violations = summary.stability_violations + summary.shifted_loss_violations
    if plus and len(trace):
        summary.max_stability_ratio = max_ratio
        summary.max_shifted_loss_excess = float(max_excess)
    summary.final_regret = float(trace.regret_increment.sum())
    summary.realized_corruption = float(trace.consumed.sum())
    summary.wall_time = time.perf_counter() - started
    return RunResult(trace, summary)


def worker_count(requested: Optional[int] = None) -> int:
    """Worker processes for sweeps: ``requested``, capped by ``GBL_THREADS`` and the CPU count."""
    limit = os.cpu_count() or 1
    env_cap = os.environ.get("GBL_THREADS")
    if env_cap:
        try:
            limit = min(limit, max(1, int(env_cap)))
        except ValueError:
            log.warning("ignoring non-integer GBL_THREADS=%r", env_cap)
    return limit if requested is None else max(1, min(requested, limit))


def _run_one(args):
    config, seed = args
    return run_experiment(config, seed)


def run_sweep(config: ExperimentConfig, seeds=None, workers: Optional[int] = None) -> list:
    """One independent run per seed; results come back in seed order."""
    seeds = tuple(config.seeds if seeds is None else seeds)
    n = min(worker_count(workers), len(seeds))
    if n <= 1:
        return [run_experiment(config, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_one, [(config, s) for s in seeds]))
