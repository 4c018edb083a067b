"""FTRL with feedback graphs: parameters, sampling, loss estimation and updates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np

from .entropy import InverseSqrtSchedule, RegularizerParams, check_simplex
from .errors import ContractError, DimensionError, FeedbackError
from .graph import CliqueCover, FeedbackGraph
from .solver import DEFAULT_TOL, ftrl_solve


def default_params(num_arms: int, horizon: int) -> RegularizerParams:
    """alpha = 2(log^2(NT) + 1), beta = 9, gamma = 1/(NT), eta_t = 1/sqrt(t)."""
    if num_arms < 1 or horizon < 1:
        raise ValueError("num_arms and horizon must be positive")
    nt = num_arms * horizon
    return RegularizerParams(
        alpha=2.0 * (math.log(nt) ** 2 + 1.0),
        beta=9.0,
        gamma=1.0 / nt,
        eta_schedule=InverseSqrtSchedule(),
    )


@dataclass
class LearnerState:
    """Cumulative estimated losses L_{t-1} before round ``round`` is played.

    ``last_distribution`` is only a warm start for the solver; it never changes
    the solution, which is unique.
    """

    cum_est_loss: np.ndarray
    round: int
    params: RegularizerParams
    cover: CliqueCover
    last_distribution: Optional[np.ndarray] = field(default=None, repr=False)
    tol: float = DEFAULT_TOL

    @classmethod
    def initial(cls, cover: CliqueCover, params: RegularizerParams, tol: float = DEFAULT_TOL) -> "LearnerState":
        if not cover.is_partition:
            raise ContractError("the cover must partition the arms")
        return cls(np.zeros(cover.num_arms), 1, params, cover, tol=tol)


@dataclass(frozen=True)
class Feedback:
    chosen_arm: int
    observed: Mapping[int, float]


def make_feedback(graph: FeedbackGraph, chosen_arm: int, losses) -> Feedback:
    """Feedback revealing ``losses`` on the full neighborhood of ``chosen_arm``."""
    nbrs = graph.neighbors(chosen_arm)
    return Feedback(int(chosen_arm), dict(zip(nbrs.tolist(), np.asarray(losses, dtype=float)[nbrs].tolist())))


def check_feedback(feedback: Feedback, graph: FeedbackGraph) -> None:
    expected = set(graph.neighbors(feedback.chosen_arm).tolist())
    if set(feedback.observed) != expected:
        raise FeedbackError(
            f"observed arms {sorted(feedback.observed)} differ from N({feedback.chosen_arm}) = {sorted(expected)}")
    for i, loss in feedback.observed.items():
        if not 0.0 <= loss <= 1.0:
            raise FeedbackError(f"loss {loss} of arm {i} is outside [0, 1]")


def next_distribution(state: LearnerState) -> np.ndarray:
    """p_t = argmin over the truncated simplex of L_{t-1} . p + R_t(p)."""
    report = ftrl_solve(state.cum_est_loss, state.cover, state.params, state.round,
                        warm_start=state.last_distribution, tol=state.tol)
    state.last_distribution = report.solution
    return report.solution


def plus_iterate(state: LearnerState) -> np.ndarray:
    """p_t^+ = argmin of L_t . p + R_t(p), for a state just updated at round t.

    Uses the round-t regularizer (``state.round - 1``), warm-started at p_t.
    """
    t = state.round - 1
    if t < 1:
        raise ContractError("plus_iterate needs a state that has been updated at least once")
    report = ftrl_solve(state.cum_est_loss, state.cover, state.params, t,
                        warm_start=state.last_distribution, tol=state.tol)
    return report.solution


def sample_arm(p, rng: np.random.Generator) -> int:
    """Inverse-CDF categorical draw from a single uniform variate."""
    cdf = np.cumsum(p)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)


def estimate_losses(feedback: Feedback, p, cover: CliqueCover) -> np.ndarray:
    """Importance-weighted estimate l_i / p(V(i)) on the chosen clique, zero elsewhere.

    Observed losses outside the chosen arm's clique are ignored.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (cover.num_arms,):
        raise DimensionError(f"p has shape {p.shape}, cover has {cover.num_arms} arms")
    k = int(cover.arm_to_clique[feedback.chosen_arm])
    block = cover.cliques[k]
    marginal = p[list(block)].sum()
    est = np.zeros(cover.num_arms)
    for i in block:
        try:
            loss = feedback.observed[i]
        except KeyError:
            raise FeedbackError(
                f"arm {i} shares a clique with the chosen arm {feedback.chosen_arm} but was not observed") from None
        est[i] = loss / marginal
    return est


def update(state: LearnerState, estimate) -> LearnerState:
    """L_t = L_{t-1} + estimate; the round counter advances by one."""
    estimate = np.asarray(estimate, dtype=float)
    if estimate.shape != state.cum_est_loss.shape:
        raise DimensionError("estimate and cumulative loss differ in shape")
    if np.any(estimate < 0) or not np.all(np.isfinite(estimate)):
        raise ContractError("loss estimates must be finite and nonnegative")
    return replace(state, cum_est_loss=state.cum_est_loss + estimate, round=state.round + 1)


def validate_distribution(p, params: RegularizerParams) -> np.ndarray:
    return check_simplex(p, params.gamma)
