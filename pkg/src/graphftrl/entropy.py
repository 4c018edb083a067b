"""Tsallis-Shannon entropy, clique log-barrier and their derivatives.

For a cover V_1..V_K and a positive vector p with clique marginals
q_k = p(V_k),

    Psi_alpha(p) = sum_k sqrt(q_k) * sum_{i in V_k} psi_alpha(p_i / q_k),
    psi_alpha(y) = y log y - alpha y,

    Phi(p) = -beta * sum_k log q_k.

Natural logarithms throughout. Hessians are dense N x N arrays; they are
block-diagonal in the cover, and entries across distinct cliques are exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError
from .graph import CliqueCover

SIMPLEX_ATOL = 1e-12


class InverseSqrtSchedule:
    """Step sizes eta_t = scale / sqrt(t)."""

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def __call__(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"rounds start at 1, got {t}")
        return self.scale / math.sqrt(t)

    def __repr__(self):
        return f"InverseSqrtSchedule(scale={self.scale})"

    def __eq__(self, other):
        return isinstance(other, InverseSqrtSchedule) and other.scale == self.scale

    def __hash__(self):
        return hash(("InverseSqrtSchedule", self.scale))


class ConstantSchedule:
    def __init__(self, eta: float):
        if eta <= 0:
            raise ValueError("eta must be positive")
        self.eta = float(eta)

    def __call__(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"rounds start at 1, got {t}")
        return self.eta

    def __repr__(self):
        return f"ConstantSchedule({self.eta})"


@dataclass(frozen=True)
class RegularizerParams:
    """Parameters of R_t(p) = Psi_alpha(p) / eta_t + Phi(p) over the gamma-truncated simplex."""

    alpha: float
    beta: float
    gamma: float
    eta_schedule: Callable[[int], float] = field(default_factory=InverseSqrtSchedule)

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")

    def eta(self, t: int) -> float:
        return float(self.eta_schedule(t))


# -- simplex helpers -------------------------------------------------------------

def check_simplex(p, gamma: float = 0.0, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Return ``p`` as a float array after checking it lies in the (truncated) simplex."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DimensionError("a simplex point is a nonempty 1-d vector")
    if abs(p.sum() - 1.0) > atol:
        raise DomainError(f"entries sum to {p.sum()!r}, not 1")
    if p.min() < gamma - atol:
        raise DomainError(f"min entry {p.min()!r} is below the floor {gamma!r}")
    return p


def _positive(p, cover: CliqueCover) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (cover.num_arms,):
        raise DimensionError(f"vector has shape {p.shape}, cover has {cover.num_arms} arms")
    if not np.all(p > 0):
        raise DomainError("all entries must be strictly positive")
    return p


def clique_marginals(p, cover: CliqueCover) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (cover.num_arms,):
        raise DimensionError(f"vector has shape {p.shape}, cover has {cover.num_arms} arms")
    return np.bincount(cover.arm_to_clique, weights=p, minlength=cover.num_cliques)


# -- Tsallis-Shannon entropy -------------------------------------------------------

def tsallis_shannon_value(p, cover: CliqueCover, alpha: float) -> float:
    p = _positive(p, cover)
    labels = cover.arm_to_clique
    q = np.bincount(labels, weights=p, minlength=cover.num_cliques)
    inner = np.bincount(labels, weights=p * np.log(p / q[labels]), minlength=cover.num_cliques)
    return float(-alpha * np.sqrt(q).sum() + (inner / np.sqrt(q)).sum())


def tsallis_shannon_grad(p, cover: CliqueCover, alpha: float) -> np.ndarray:
    """Gradient (log y_i - alpha/2 - S_k/2) / sqrt(q_k), with y_i = p_i/q_k and S_k = sum y log y."""
    p = _positive(p, cover)
    labels = cover.arm_to_clique
    q = np.bincount(labels, weights=p, minlength=cover.num_cliques)
    logy = np.log(p / q[labels])
    s = np.bincount(labels, weights=p * logy, minlength=cover.num_cliques) / q
    return (logy - 0.5 * alpha - 0.5 * s[labels]) / np.sqrt(q[labels])


def tsallis_perspective_value(x, h: Callable) -> float:
    """H(x) = sqrt(|x|_1) * sum_i h(x_i / |x|_1) for positive x."""
    x = np.asarray(x, dtype=float)
    s = x.sum()
    return float(math.sqrt(s) * np.sum(h(x / s)))


def tsallis_perspective_hessian(x, h: Callable, dh: Callable, d2h: Callable) -> np.ndarray:
    """Hessian of the Tsallis-perspective of a scalar function ``h`` at positive ``x``.

    Three-term assembly with z = 1 and z_i = 1 - (|x|_1 / x_i) e_i:

        -1/4 s^{-3/2} sum_i h(y_i) z z^T
        + s^{-7/2} sum_i x_i^2 h''(y_i) z_i z_i^T
        + 1/2 s^{-5/2} sum_i x_i h'(y_i) (z z_i^T + z_i z^T)
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DimensionError("x must be a nonempty vector")
    if not np.all(x > 0):
        raise DomainError("x must be strictly positive")
    d = x.size
    s = x.sum()
    y = x / s
    hv, d1, d2 = h(y), dh(y), d2h(y)
    ones = np.ones(d)
    # rows of zi are the z_i vectors
    zi = np.ones((d, d)) - np.diag(s / x)
    first = -0.25 * s ** -1.5 * hv.sum() * np.outer(ones, ones)
    second = s ** -3.5 * (zi.T * (x ** 2 * d2)) @ zi
    w = x * d1 @ zi
    third = 0.5 * s ** -2.5 * (np.outer(ones, w) + np.outer(w, ones))
    return first + second + third


def _psi(alpha):
    def h(y):
        return y * np.log(y) - alpha * y

    def dh(y):
        return np.log(y) + 1.0 - alpha

    def d2h(y):
        return 1.0 / y

    return h, dh, d2h


def tsallis_shannon_hessian(p, cover: CliqueCover, alpha: float) -> np.ndarray:
    """Block-diagonal Hessian of Psi_alpha, each block from :func:`tsallis_perspective_hessian`."""
    p = _positive(p, cover)
    h, dh, d2h = _psi(alpha)
    out = np.zeros((cover.num_arms, cover.num_arms))
    for block in cover.cliques:
        idx = np.asarray(block)
        out[np.ix_(idx, idx)] = tsallis_perspective_hessian(p[idx], h, dh, d2h)
    return out


def tsallis_shannon_hessian_compact(p, cover: CliqueCover, alpha: float) -> np.ndarray:
    """Same Hessian from the simplified per-clique closed form the solver uses.

    H_ij = [i == j] / (p_i sqrt(q)) + q^{-3/2} (alpha/4 - 1 + 3 S/4 - (log y_i + log y_j)/2)
    for i, j in the same clique.
    """
    p = _positive(p, cover)
    labels = cover.arm_to_clique
    q = np.bincount(labels, weights=p, minlength=cover.num_cliques)
    logy = np.log(p / q[labels])
    s = np.bincount(labels, weights=p * logy, minlength=cover.num_cliques) / q
    ql = q[labels]
    same = labels[:, None] == labels[None, :]
    c = 0.25 * alpha - 1.0 + 0.75 * s[labels]
    off = ql ** -1.5 * (c - 0.5 * logy)
    hess = np.where(same, off[:, None] - 0.5 * ql[:, None] ** -1.5 * logy[None, :], 0.0)
    hess[np.diag_indices_from(hess)] += 1.0 / (p * np.sqrt(ql))
    return hess


def hessian_diag_lower_bound(p, cover: CliqueCover) -> np.ndarray:
    """Diagonal entries 1 / (2 p_i sqrt(p(V(i))))."""
    p = _positive(p, cover)
    q = np.bincount(cover.arm_to_clique, weights=p, minlength=cover.num_cliques)
    return 1.0 / (2.0 * p * np.sqrt(q[cover.arm_to_clique]))


def tsallis_perspective_min_eig(x, alpha: float) -> float:
    """Smallest Hessian eigenvalue of the Tsallis-perspective of psi_alpha at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DimensionError("x must have at least two entries")
    hess = tsallis_perspective_hessian(x, *_psi(alpha))
    return float(np.linalg.eigvalsh(hess)[0])


def diag_bound_alpha(gamma_cond: float) -> float:
    """The shift 2(1 + log^2(1/gamma)) under which the diagonal Hessian bound holds
    for all points whose within-clique conditionals are at least ``gamma_cond``."""
    return 2.0 * (1.0 + math.log(1.0 / gamma_cond) ** 2)


# -- clique log-barrier -----------------------------------------------------------------

def _marginals_positive(p, cover):
    q = clique_marginals(p, cover)
    if not np.all(q > 0):
        raise DomainError("all clique marginals must be strictly positive")
    return q


def log_barrier_value(p, cover: CliqueCover, beta: float) -> float:
    q = _marginals_positive(p, cover)
    return float(-beta * np.log(q).sum())


def log_barrier_grad(p, cover: CliqueCover, beta: float) -> np.ndarray:
    q = _marginals_positive(p, cover)
    return -beta / q[cover.arm_to_clique]


def log_barrier_hessian(p, cover: CliqueCover, beta: float) -> np.ndarray:
    q = _marginals_positive(p, cover)
    labels = cover.arm_to_clique
    same = labels[:, None] == labels[None, :]
    return np.where(same, beta / q[labels][:, None] ** 2, 0.0)


# -- full regularizer --------------------------------------------------------------------

def regularizer_eval(p, cover: CliqueCover, params: RegularizerParams, t: int):
    """Value, gradient and Hessian of R_t(p) = Psi_alpha(p) / eta_t + Phi(p)."""
    inv_eta = 1.0 / params.eta(t)
    value = inv_eta * tsallis_shannon_value(p, cover, params.alpha) + log_barrier_value(p, cover, params.beta)
    grad = inv_eta * tsallis_shannon_grad(p, cover, params.alpha) + log_barrier_grad(p, cover, params.beta)
    hess = inv_eta * tsallis_shannon_hessian(p, cover, params.alpha) + log_barrier_hessian(p, cover, params.beta)
    return value, grad, hess
