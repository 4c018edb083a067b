"""Per-round FTRL problem over the gamma-truncated simplex.

    minimize   L . p + Psi_alpha(p) / eta_t + Phi(p)
    subject to sum(p) = 1,  p_i >= gamma

Damped Newton on the equality-constrained problem, with an active set for the
floor constraints: an arm is pinned at gamma when a step would cross the floor
and released when its multiplier turns negative. The numeric core is compiled
with numba; :func:`brute_force_solve` is an independent pure-numpy oracle for
tests on tiny instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from scipy.optimize import brentq

from .entropy import RegularizerParams, log_barrier_grad, tsallis_shannon_grad
from .errors import DimensionError, InfeasibleError, NonConvergenceError, SizeLimitError
from .graph import CliqueCover

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
ARMIJO = 1e-4
MAX_BACKTRACKS = 50

# kernel status codes
_CONVERGED = 0
_MAX_ITER = 1
_LINE_SEARCH = 2


@dataclass
class SolveReport:
    solution: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool


@numba.njit(cache=True)
def _marginals(p, labels, num_cliques, q, s):
    for k in range(num_cliques):
        q[k] = 0.0
        s[k] = 0.0
    for i in range(p.size):
        q[labels[i]] += p[i]
    for i in range(p.size):
        k = labels[i]
        s[k] += p[i] * math.log(p[i] / q[k])
    for k in range(num_cliques):
        s[k] /= q[k]


@numba.njit(cache=True)
def _objective(p, cum_loss, labels, num_cliques, inv_eta, alpha, beta, q, s):
    _marginals(p, labels, num_cliques, q, s)
    val = 0.0
    for i in range(p.size):
        val += cum_loss[i] * p[i]
    for k in range(num_cliques):
        rq = math.sqrt(q[k])
        val += inv_eta * rq * (s[k] - alpha) - beta * math.log(q[k])
    return val


@numba.njit(cache=True)
def _gradient(p, cum_loss, labels, num_cliques, inv_eta, alpha, beta, q, s, g):
    _marginals(p, labels, num_cliques, q, s)
    for i in range(p.size):
        k = labels[i]
        g[i] = (cum_loss[i]
                + inv_eta * (math.log(p[i] / q[k]) - 0.5 * alpha - 0.5 * s[k]) / math.sqrt(q[k])
                - beta / q[k])


@numba.njit(cache=True)
def _kkt(g, pinned):
    """Max-norm KKT residual, the multiplier nu, and the most negative pinned multiplier."""
    gmax = -np.inf
    gmin = np.inf
    for i in range(g.size):
        if not pinned[i]:
            gmax = max(gmax, g[i])
            gmin = min(gmin, g[i])
    nu = -0.5 * (gmax + gmin)
    free_res = 0.5 * (gmax - gmin)
    worst = -1
    worst_mu = 0.0
    for i in range(g.size):
        if pinned[i]:
            mu = g[i] + nu
            if mu < worst_mu:
                worst_mu = mu
                worst = i
    return max(free_res, -worst_mu), free_res, worst, worst_mu


@numba.njit(cache=True)
def _newton_direction(p, g, pinned, labels, inv_eta, alpha, beta, q, s):
    n = p.size
    m = 0
    for i in range(n):
        if not pinned[i]:
            m += 1
    idx = np.empty(m, dtype=np.int64)
    m = 0
    for i in range(n):
        if not pinned[i]:
            idx[m] = i
            m += 1
    hess = np.zeros((m, m))
    logy = np.empty(m)
    for a in range(m):
        i = idx[a]
        logy[a] = math.log(p[i] / q[labels[i]])
    for a in range(m):
        i = idx[a]
        k = labels[i]
        base = inv_eta * q[k] ** -1.5 * (0.25 * alpha - 1.0 + 0.75 * s[k]) + beta / (q[k] * q[k])
        scale = 0.5 * inv_eta * q[k] ** -1.5
        for b in range(m):
            j = idx[b]
            if labels[j] == k:
                hess[a, b] = base - scale * (logy[a] + logy[b])
        hess[a, a] += inv_eta / (p[i] * math.sqrt(q[k]))
    # the common offset of g only shifts nu; removing it avoids cancellation
    center = 0.0
    for a in range(m):
        center += g[idx[a]]
    center /= m
    rhs = np.empty((m, 2))
    for a in range(m):
        rhs[a, 0] = g[idx[a]] - center
        rhs[a, 1] = 1.0
    sol = np.linalg.solve(hess, rhs)
    nu = -sol[:, 0].sum() / sol[:, 1].sum()
    d = np.zeros(n)
    for a in range(m):
        d[idx[a]] = -sol[a, 0] - nu * sol[a, 1]
    return d


@numba.njit(cache=True)
def _fix_sum(p, pinned):
    # proportional, so arms near the floor (where the Hessian is huge) barely move
    drift = 1.0 - p.sum()
    free = 0.0
    for i in range(p.size):
        if not pinned[i]:
            free += p[i]
    if free > 0.0:
        for i in range(p.size):
            if not pinned[i]:
                p[i] += drift * (p[i] / free)


@numba.njit(cache=True)
def _solve_kernel(cum_loss, labels, num_cliques, inv_eta, alpha, beta, gamma, p0, tol, max_iter):
    n = cum_loss.size
    p = p0.copy()
    pinned = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if p[i] <= gamma * (1.0 + 1e-12):
            p[i] = gamma
            pinned[i] = True
    _fix_sum(p, pinned)
    q = np.empty(num_cliques)
    s = np.empty(num_cliques)
    g = np.empty(n)
    res = np.inf
    for it in range(max_iter + 1):
        _gradient(p, cum_loss, labels, num_cliques, inv_eta, alpha, beta, q, s, g)
        res, free_res, worst, worst_mu = _kkt(g, pinned)
        if res <= tol:
            return p, res, it, _CONVERGED
        if it == max_iter:
            break
        if worst >= 0 and free_res <= max(tol, 1e-2 * -worst_mu):
            pinned[worst] = False
            continue
        d = _newton_direction(p, g, pinned, labels, inv_eta, alpha, beta, q, s)
        decrement = 0.0
        for i in range(n):
            decrement -= g[i] * d[i]
        tau_max = np.inf
        blocking = -1
        for i in range(n):
            if d[i] < 0.0 and not pinned[i]:
                room = (p[i] - gamma) / -d[i]
                if room < tau_max:
                    tau_max = room
                    blocking = i
        tau = min(1.0, tau_max)
        f0 = _objective(p, cum_loss, labels, num_cliques, inv_eta, alpha, beta, q, s)
        slack = 1e-14 * (1.0 + abs(f0))
        trial = np.empty(n)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            for i in range(n):
                trial[i] = p[i] + tau * d[i]
            f1 = _objective(trial, cum_loss, labels, num_cliques, inv_eta, alpha, beta, q, s)
            if f1 <= f0 - ARMIJO * tau * decrement + slack:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            return p, res, it, _LINE_SEARCH
        if blocking >= 0 and tau == tau_max:
            trial[blocking] = gamma
            pinned[blocking] = True
        for i in range(n):
            if not pinned[i] and trial[i] <= gamma:
                trial[i] = gamma
                pinned[i] = True
        p[:] = trial
        _fix_sum(p, pinned)
    return p, res, max_iter, _MAX_ITER


def feasible_start(p, gamma: float) -> np.ndarray:
    """Map a nonnegative vector onto the truncated simplex keeping its shape above the floor."""
    p = np.maximum(np.asarray(p, dtype=float), gamma)
    excess = p - gamma
    room = 1.0 - gamma * p.size
    total = excess.sum()
    if total <= 0.0:
        return np.full(p.size, 1.0 / p.size)
    return gamma + excess * (room / total)


def ftrl_solve(cum_loss, cover: CliqueCover, params: RegularizerParams, t: int,
               warm_start: Optional[np.ndarray] = None, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> SolveReport:
    """Minimize L . p + R_t(p) over the gamma-truncated simplex.

    Raises :class:`InfeasibleError` when gamma > 1/N and
    :class:`NonConvergenceError` when the KKT residual does not drop to ``tol``.
    """
    cum_loss = np.asarray(cum_loss, dtype=float)
    n = cover.num_arms
    if cum_loss.shape != (n,):
        raise DimensionError(f"cum_loss has shape {cum_loss.shape}, cover has {n} arms")
    if not np.all(np.isfinite(cum_loss)):
        raise ValueError("cum_loss must be finite")
    gamma = params.gamma
    if gamma * n > 1.0 + 1e-12:
        raise InfeasibleError(f"gamma={gamma} exceeds 1/N={1.0 / n}")
    if gamma * n >= 1.0 - 1e-12:
        return SolveReport(np.full(n, 1.0 / n), 0.0, 0, True)
    if warm_start is None:
        start = np.full(n, 1.0 / n)
    else:
        start = feasible_start(warm_start, gamma)
    shifted = cum_loss - cum_loss.min()
    p, res, iters, status = _solve_kernel(
        shifted, cover.arm_to_clique, cover.num_cliques, 1.0 / params.eta(t),
        float(params.alpha), float(params.beta), float(gamma), start, float(tol), int(max_iter))
    if status != _CONVERGED:
        reason = "iteration cap reached" if status == _MAX_ITER else "line search failed"
        raise NonConvergenceError(
            f"ftrl_solve: {reason} at round {t} with KKT residual {res:.3e}", res, iters)
    return SolveReport(p, float(res), int(iters), True)


def ftrl_objective(p, cum_loss, cover: CliqueCover, params: RegularizerParams, t: int) -> float:
    """L . p + R_t(p), evaluated with the same compiled routine the solver uses."""
    p = np.asarray(p, dtype=float)
    q = np.empty(cover.num_cliques)
    s = np.empty(cover.num_cliques)
    return float(_objective(p, np.asarray(cum_loss, dtype=float), cover.arm_to_clique,
                            cover.num_cliques, 1.0 / params.eta(t), float(params.alpha),
                            float(params.beta), q, s))


# -- brute-force oracle ----------------------------------------------------------------

BRUTE_FORCE_MAX_ARMS = 4


def _batch_objective(points, cum_loss, cover, params, t):
    """Objective at each row of ``points`` in plain numpy."""
    labels = cover.arm_to_clique
    inv_eta = 1.0 / params.eta(t)
    onehot = np.eye(cover.num_cliques)[labels]           # (N, K)
    q = points @ onehot                                  # (M, K)
    plogp = points * np.log(points / q[:, labels])
    inner = plogp @ onehot
    psi = -params.alpha * np.sqrt(q).sum(axis=1) + (inner / np.sqrt(q)).sum(axis=1)
    phi = -params.beta * np.log(q).sum(axis=1)
    return points @ cum_loss + inv_eta * psi + phi


def _grid(n, gamma, step):
    """Points of the truncated simplex whose first n-1 coordinates sit on a lattice."""
    ticks = np.arange(gamma, 1.0 - (n - 1) * gamma + 1e-15, step)
    axes = np.meshgrid(*([ticks] * (n - 1)), indexing="ij")
    head = np.stack([a.ravel() for a in axes], axis=1)
    last = 1.0 - head.sum(axis=1)
    keep = last >= gamma
    return np.column_stack([head[keep], last[keep]])


def brute_force_solve(cum_loss, cover: CliqueCover, params: RegularizerParams, t: int,
                      grid_step: Optional[float] = None, tol: float = 1e-8) -> np.ndarray:
    """Grid search over the truncated simplex, then pairwise coordinate descent.

    Test oracle only: N <= 4. The default lattice step is 1e-3 for N <= 3 and
    1e-2 for N = 4. Each refinement move shifts mass between two arms to the
    exact 1-d minimizer (root of the directional derivative); sweeps stop when
    no move exceeds ``tol``.
    """
    cum_loss = np.asarray(cum_loss, dtype=float)
    n = cover.num_arms
    if n > BRUTE_FORCE_MAX_ARMS:
        raise SizeLimitError(f"brute_force_solve handles at most {BRUTE_FORCE_MAX_ARMS} arms, got {n}")
    gamma = params.gamma
    if gamma * n > 1.0 + 1e-12:
        raise InfeasibleError(f"gamma={gamma} exceeds 1/N={1.0 / n}")
    if n == 1 or gamma * n >= 1.0 - 1e-12:
        return np.full(n, 1.0 / n)
    cum_loss = cum_loss - cum_loss.min()
    if grid_step is None:
        grid_step = 1e-3 if n <= 3 else 1e-2
    points = _grid(n, gamma, grid_step)
    values = _batch_objective(points, cum_loss, cover, params, t)
    p = points[np.argmin(values)].copy()

    inv_eta = 1.0 / params.eta(t)

    def grad(x):
        return (cum_loss + inv_eta * tsallis_shannon_grad(x, cover, params.alpha)
                + log_barrier_grad(x, cover, params.beta))

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(20000):
        biggest = 0.0
        for i, j in pairs:
            lo, hi = gamma - p[i], p[j] - gamma

            def slope(delta):
                x = p.copy()
                x[i] += delta
                x[j] -= delta
                x[j] = max(x[j], gamma)
                x[i] = max(x[i], gamma)
                gx = grad(x)
                return gx[i] - gx[j]

            if hi - lo <= 0:
                continue
            if slope(lo) >= 0:
                delta = lo
            elif slope(hi) <= 0:
                delta = hi
            else:
                delta = brentq(slope, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            p[i] += delta
            p[j] -= delta
            biggest = max(biggest, abs(delta))
        if biggest < tol * 1e-2:
            break
    return p
