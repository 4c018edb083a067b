"""Self-checks run by ``graphftrl check``: derivative formulas against finite
differences, the solver against a brute-force oracle, estimator unbiasedness,
and the non-convexity witness for the unshifted perspective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..entropy import (RegularizerParams, ConstantSchedule, hessian_diag_lower_bound, diag_bound_alpha,
                       tsallis_perspective_min_eig, tsallis_shannon_grad, tsallis_shannon_hessian,
                       tsallis_shannon_hessian_compact, tsallis_shannon_value)
from ..graph import CliqueCover
from ..learner import estimate_losses, Feedback
from ..solver import brute_force_solve, ftrl_solve


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_cover(rng: np.random.Generator, num_arms: int) -> CliqueCover:
    """Uniformly random labels, relabelled so every clique is nonempty."""
    k = int(rng.integers(1, num_arms + 1))
    labels = np.concatenate([np.arange(k), rng.integers(0, k, num_arms - k)])
    rng.shuffle(labels)
    return CliqueCover.from_cliques([np.flatnonzero(labels == j).tolist() for j in range(k)], num_arms)


def random_point(rng: np.random.Generator, cover: CliqueCover, cond_floor: float = 0.0,
                 marg_floor: float = 1e-6) -> np.ndarray:
    """Random simplex point with within-clique conditionals at least ``cond_floor``."""
    q = rng.dirichlet(np.full(cover.num_cliques, 0.5))
    q = np.maximum(q, marg_floor)
    q /= q.sum()
    p = np.zeros(cover.num_arms)
    for k, block in enumerate(cover.cliques):
        d = len(block)
        if d * cond_floor >= 1.0:
            y = np.full(d, 1.0 / d)
        else:
            y = cond_floor + (1.0 - d * cond_floor) * rng.dirichlet(np.full(d, 0.3))
            y = np.maximum(y, max(cond_floor, 1e-9))
            y /= y.sum()
        p[list(block)] = q[k] * y
    return p


def fd_hessian(p, cover, alpha, rel_step=1e-6):
    """Central differences of the analytic gradient, steps scaled to each coordinate."""
    n = p.size
    out = np.zeros((n, n))
    for j in range(n):
        h = rel_step * p[j]
        e = np.zeros(n)
        e[j] = h
        out[:, j] = (tsallis_shannon_grad(p + e, cover, alpha) - tsallis_shannon_grad(p - e, cover, alpha)) / (2 * h)
    return 0.5 * (out + out.T)


def fd_gradient(p, cover, alpha, rel_step=1e-6):
    n = p.size
    out = np.zeros(n)
    for j in range(n):
        h = rel_step * p[j]
        e = np.zeros(n)
        e[j] = h
        out[j] = (tsallis_shannon_value(p + e, cover, alpha) - tsallis_shannon_value(p - e, cover, alpha)) / (2 * h)
    return out


def check_hessian(instances: int = 50, seed: int = 0, tol: float = 1e-4) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_h = worst_g = worst_c = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 9))
        cover = random_cover(rng, n)
        p = random_point(rng, cover, cond_floor=1e-3, marg_floor=1e-3)
        alpha = float(rng.uniform(0.0, 10.0))
        hess = tsallis_shannon_hessian(p, cover, alpha)
        num = fd_hessian(p, cover, alpha)
        worst_h = max(worst_h, np.linalg.norm(hess - num) / np.linalg.norm(hess))
        compact = tsallis_shannon_hessian_compact(p, cover, alpha)
        worst_c = max(worst_c, np.linalg.norm(hess - compact) / np.linalg.norm(hess))
        grad = tsallis_shannon_grad(p, cover, alpha)
        worst_g = max(worst_g, np.linalg.norm(grad - fd_gradient(p, cover, alpha)) / max(np.linalg.norm(grad), 1.0))
    worst = max(worst_h, worst_g, worst_c)
    return CheckResult("hessian", bool(worst <= tol),
                       f"rel. error: hessian {worst_h:.2e}, gradient {worst_g:.2e}, compact form {worst_c:.2e}")


def check_lower_bound(points: int = 200, seed: int = 1, atol: float = 1e-8) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = np.inf
    for cond in (1e-2, 1e-4):
        alpha = diag_bound_alpha(cond)
        for _ in range(points):
            cover = random_cover(rng, int(rng.integers(1, 9)))
            p = random_point(rng, cover, cond_floor=cond)
            gap = tsallis_shannon_hessian(p, cover, alpha) - np.diag(hessian_diag_lower_bound(p, cover))
            worst = min(worst, float(np.linalg.eigvalsh(gap)[0]))
    return CheckResult("hessian lower bound", worst >= -atol, f"min eigenvalue of the gap {worst:.3e}")


def perspective_grid_min_eig(alpha: float, step: float = 0.01) -> float:
    grid = np.arange(step, 1.0 - step / 2, step)
    return min(tsallis_perspective_min_eig(np.array([a, b]), alpha) for a in grid for b in grid)


def check_convexity_witness() -> CheckResult:
    at_zero = perspective_grid_min_eig(0.0)
    shifted = perspective_grid_min_eig(0.25)
    return CheckResult("convexity witness", at_zero < 0 and shifted >= -1e-10,
                       f"min eigenvalue: alpha=0 {at_zero:.3e}, alpha=0.25 {shifted:.3e}")


def check_solver(instances: int = 10, seed: int = 2, tol: float = 1e-6) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(instances):
        cover = random_cover(rng, 3)
        params = RegularizerParams(alpha=float(rng.uniform(0.5, 20.0)), beta=float(rng.uniform(0.0, 9.0)),
                                   gamma=float(rng.choice([1e-4, 1e-2])))
        t = int((1, 10, 1000)[i % 3])
        scale = 10.0 ** rng.uniform(0, 4)
        cum = rng.uniform(0, scale, 3)
        fast = ftrl_solve(cum, cover, params, t).solution
        slow = brute_force_solve(cum, cover, params, t)
        worst = max(worst, float(np.abs(fast - slow).max()))
    return CheckResult("solver vs brute force", worst <= tol, f"max-norm difference {worst:.2e}")


def check_estimator(instances: int = 20, draws: int = 20000, seed: int = 3) -> CheckResult:
    """Exact expectation over the sampled arm, plus a 4-sigma Monte-Carlo check
    using the exact per-coordinate standard deviation."""
    rng = np.random.default_rng(seed)
    worst_exact, worst_z = 0.0, 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 9))
        cover = random_cover(rng, n)
        p = rng.dirichlet(np.ones(n))
        p = np.maximum(p, 1e-3)
        p /= p.sum()
        loss = rng.uniform(0, 1, n)
        ests = np.array([estimate_losses(Feedback(i, dict(enumerate(loss))), p, cover) for i in range(n)])
        worst_exact = max(worst_exact, float(np.abs(p @ ests - loss).max()))
        arms = rng.choice(n, size=draws, p=p)
        sigma = np.sqrt(np.maximum(p @ ests ** 2 - loss ** 2, 0.0))
        dev = np.abs(ests[arms].mean(axis=0) - loss)
        se = sigma / np.sqrt(draws)
        z = np.where(se > 0, dev / np.where(se > 0, se, 1.0), np.where(dev > 1e-12, np.inf, 0.0))
        worst_z = max(worst_z, float(z.max()))
    return CheckResult("estimator unbiasedness", worst_exact <= 1e-12 and worst_z <= 4.0,
                       f"exact identity error {worst_exact:.1e}, worst Monte-Carlo z {worst_z:.2f}")


def run_checks() -> list:
    return [check_hessian(), check_lower_bound(), check_convexity_witness(), check_solver(), check_estimator()]
