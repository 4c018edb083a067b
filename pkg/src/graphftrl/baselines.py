"""Graph-oblivious baseline: FTRL with 1/2-Tsallis entropy over the full simplex."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .entropy import InverseSqrtSchedule
from .errors import ContractError, NonConvergenceError

NORMALIZATION_TOL = 1e-12


@dataclass
class MabState:
    cum_est_loss: np.ndarray
    round: int = 1
    eta_schedule: Callable[[int], float] = InverseSqrtSchedule()
    last_offset: float = float("nan")

    @classmethod
    def initial(cls, num_arms: int, eta_schedule: Callable[[int], float] = InverseSqrtSchedule()) -> "MabState":
        return cls(np.zeros(num_arms), 1, eta_schedule)


def tsallis_inf_distribution(cum_loss, eta: float, tol: float = NORMALIZATION_TOL, max_iter: int = 100,
                             offset_hint: float = float("nan")):
    """argmin of eta L.p - sum_i sqrt(p_i) over the simplex, with its offset nu.

    Stationarity gives p_i = 1 / (4 eta^2 (L_i - nu)^2) with nu < min L. The
    normalization sum is increasing and convex in nu, so Newton from a point
    where the sum is at least 1 decreases monotonically to the root.
    """
    shifted = np.asarray(cum_loss, dtype=float)
    base = shifted.min()
    shifted = shifted - base
    # at nu = -1/(2 eta) the best arm alone carries mass 1, so the sum is >= 1
    safe = -0.5 / eta
    nu = safe
    hinted = not math.isnan(offset_hint) and offset_hint - base < safe
    if hinted:
        nu = offset_hint - base
    for _ in range(max_iter):
        w = 1.0 / (2.0 * eta * (shifted - nu))
        p = w * w
        total = p.sum()
        if abs(total - 1.0) <= tol:
            return p / total, nu + base
        if total < 1.0 and hinted:
            # the hint sat left of the root; restart from the safe side
            nu, hinted = safe, False
            continue
        slope = 4.0 * eta * (p * w).sum()
        nu -= (total - 1.0) / slope
    raise NonConvergenceError(
        f"normalization did not converge: |sum - 1| = {abs(total - 1.0):.3e}", abs(total - 1.0), max_iter)


def mab_next_distribution(state: MabState) -> np.ndarray:
    eta = float(state.eta_schedule(state.round))
    p, nu = tsallis_inf_distribution(state.cum_est_loss, eta, offset_hint=state.last_offset)
    state.last_offset = nu
    return p


def mab_estimate(chosen: int, loss: float, p) -> np.ndarray:
    """Importance-weighted estimate: loss / p_chosen on the chosen arm only."""
    p = np.asarray(p, dtype=float)
    if not 0.0 <= loss <= 1.0:
        raise ContractError(f"loss {loss} is outside [0, 1]")
    est = np.zeros(p.size)
    est[chosen] = loss / p[chosen]
    return est


def mab_update(state: MabState, estimate) -> MabState:
    estimate = np.asarray(estimate, dtype=float)
    if np.any(estimate < 0) or not np.all(np.isfinite(estimate)):
        raise ContractError("loss estimates must be finite and nonnegative")
    return replace(state, cum_est_loss=state.cum_est_loss + estimate, round=state.round + 1)
