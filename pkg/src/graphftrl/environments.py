"""Loss generators for the stochastic, corrupted-stochastic and adversarial regimes.

Every environment returns, per round, the clean loss vector, the final
(possibly corrupted) vector the learner sees, and the corruption consumed that
round, ``max_i |final_i - clean_i|``. All losses lie in [0, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DimensionError
from .graph import CliqueCover

FAMILIES = ("bernoulli", "uniform")
STRATEGIES = ("none", "flip_best", "random_burst")
PATTERNS = ("alternating", "sinusoidal", "fixed")


@dataclass(frozen=True, eq=False)
class StochasticSpec:
    """i.i.d. losses with per-arm means.

    ``uniform`` draws from [mu - w, mu + w] with w = min(width, mu, 1 - mu),
    so the interval stays inside [0, 1] and the mean is exactly mu.
    """

    means: np.ndarray
    family: str = "bernoulli"
    width: float = 0.1

    def __post_init__(self):
        mu = np.array(self.means, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ConfigError("means must be a nonempty vector")
        if np.any(mu < 0) or np.any(mu > 1):
            raise ConfigError("means must lie in [0, 1]")
        if np.count_nonzero(mu == mu.min()) != 1:
            raise ConfigError("the best arm (argmin of the means) must be unique")
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        mu.setflags(write=False)
        object.__setattr__(self, "means", mu)

    @property
    def num_arms(self) -> int:
        return self.means.size

    @property
    def best_arm(self) -> int:
        return int(np.argmin(self.means))

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        if self.family == "bernoulli":
            return (rng.random(self.num_arms) < self.means).astype(float)
        half = np.minimum(self.width, np.minimum(self.means, 1.0 - self.means))
        return self.means + half * rng.uniform(-1.0, 1.0, self.num_arms)


@dataclass(frozen=True)
class CorruptionSpec:
    """Oblivious corruption of a pre-drawn stochastic sequence.

    ``flip_best`` pushes the best arm's loss to 1 and the runner-up's to 0;
    ``random_burst`` replaces the loss vector with uniform random bits. Both act
    on the earliest rounds until the budget runs out; the last corrupted round
    moves each loss at most the remaining budget toward its target.
    """

    budget: float = 0.0
    strategy: str = "none"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown corruption strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.budget < 0:
            raise ConfigError("corruption budget must be nonnegative")


@dataclass(frozen=True, eq=False)
class AdversarialSpec:
    """Oblivious adversarial sequences.

    ``alternating``: the arms in ``arms`` (default: first and last arm) take
    turns being best, each for ``block`` rounds; the current best has mean
    ``low`` and every other arm mean ``high``. ``sinusoidal``: arm i has mean 0.5 + amplitude *
    sin(2 pi (t / period + i / N)). For both, ``noise="bernoulli"`` draws 0/1
    losses with those means and ``noise="none"`` emits the means themselves.
    ``fixed``: rows of ``sequence`` in order (see :func:`read_loss_csv`).
    """

    pattern: str
    num_arms: int
    block: int = 500
    arms: Optional[Sequence[int]] = None
    low: float = 0.0
    high: float = 1.0
    amplitude: float = 0.4
    period: float = 1000.0
    noise: str = "bernoulli"
    sequence: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ConfigError(f"unknown adversarial pattern {self.pattern!r}; expected one of {PATTERNS}")
        if self.noise not in ("bernoulli", "none"):
            raise ConfigError("noise must be 'bernoulli' or 'none'")
        if self.pattern == "alternating":
            arms = tuple(sorted({0, self.num_arms - 1})) if self.arms is None else tuple(int(a) for a in self.arms)
            if not arms or any(not 0 <= a < self.num_arms for a in arms):
                raise ConfigError("alternating arms must be valid arm indices")
            if self.block < 1:
                raise ConfigError("block must be positive")
            if not (0 <= self.low <= 1 and 0 <= self.high <= 1):
                raise ConfigError("low/high must lie in [0, 1]")
            object.__setattr__(self, "arms", arms)
        elif self.pattern == "sinusoidal":
            if not 0 <= self.amplitude <= 0.5:
                raise ConfigError("amplitude must lie in [0, 0.5]")
        else:
            if self.sequence is None:
                raise ConfigError("the fixed pattern needs a loss sequence")
            seq = np.array(self.sequence, dtype=float)
            if seq.ndim != 2 or seq.shape[1] != self.num_arms:
                raise DimensionError(f"sequence has shape {seq.shape}, expected (T, {self.num_arms})")
            if np.any(seq < 0) or np.any(seq > 1):
                raise ConfigError("fixed losses must lie in [0, 1]")
            seq.setflags(write=False)
            object.__setattr__(self, "sequence", seq)

    def means_at(self, t: int) -> np.ndarray:
        if self.pattern == "alternating":
            best = self.arms[((t - 1) // self.block) % len(self.arms)]
            mu = np.full(self.num_arms, self.high)
            mu[best] = self.low
            return mu
        if self.pattern == "sinusoidal":
            phase = t / self.period + np.arange(self.num_arms) / self.num_arms
            return 0.5 + self.amplitude * np.sin(2 * np.pi * phase)
        if t > len(self.sequence):
            raise IndexError(f"fixed sequence has {len(self.sequence)} rounds, asked for round {t}")
        return self.sequence[t - 1]


class Environment:
    """Base class; subclasses implement :meth:`_clean` and optionally :meth:`_corrupt`."""

    regime = "stochastic"

    def __init__(self, num_arms: int):
        self.num_arms = num_arms
        self.consumed_total = 0.0

    def reset(self) -> None:
        self.consumed_total = 0.0

    def gen_round(self, t: int, rng: np.random.Generator):
        clean = self._clean(t, rng)
        final = self._corrupt(clean, t, rng)
        consumed = float(np.max(np.abs(final - clean))) if final is not clean else 0.0
        self.consumed_total += consumed
        return clean, final, consumed

    def _clean(self, t, rng):
        raise NotImplementedError

    def _corrupt(self, clean, t, rng):
        return clean


class StochasticEnvironment(Environment):
    """i.i.d. losses, optionally corrupted; labelled ``corrupted`` when a strategy is set."""

    def __init__(self, spec: StochasticSpec, corruption: Optional[CorruptionSpec] = None):
        super().__init__(spec.num_arms)
        self.spec = spec
        self.corruption = corruption or CorruptionSpec()
        self.regime = "stochastic" if self.corruption.strategy == "none" else "corrupted"
        means = spec.means
        self._best = spec.best_arm
        order = np.argsort(means, kind="stable")
        self._runner_up = int(order[1]) if means.size > 1 else self._best

    @property
    def means(self) -> np.ndarray:
        return self.spec.means

    def _clean(self, t, rng):
        return self.spec.draw(rng)

    def _corrupt(self, clean, t, rng):
        strategy = self.corruption.strategy
        if strategy == "none":
            return clean
        remaining = self.corruption.budget - self.consumed_total
        if remaining <= 0.0:
            return clean
        if strategy == "flip_best":
            target = clean.copy()
            target[self._best] = 1.0
            target[self._runner_up] = 0.0
        else:
            target = (rng.random(self.num_arms) < 0.5).astype(float)
        final = clean + np.clip(target - clean, -remaining, remaining)
        return np.clip(final, 0.0, 1.0)


class AdversarialEnvironment(Environment):
    regime = "adversarial"

    def __init__(self, spec: AdversarialSpec):
        super().__init__(spec.num_arms)
        self.spec = spec

    def _clean(self, t, rng):
        mu = self.spec.means_at(t)
        if self.spec.pattern == "fixed" or self.spec.noise == "none":
            return np.array(mu, dtype=float)
        return (rng.random(self.num_arms) < mu).astype(float)


def gen_round(env: Environment, t: int, rng: np.random.Generator):
    return env.gen_round(t, rng)


def gaps(spec: StochasticSpec, cover: CliqueCover):
    """Per-arm gaps, per-clique minimal suboptimal gaps, and Z = sum over positive clique gaps of 1/gap."""
    if spec.num_arms != cover.num_arms:
        raise DimensionError("spec and cover have different arm counts")
    mu = spec.means
    best = spec.best_arm
    arm_gaps = mu - mu[best]
    clique_gaps = np.zeros(cover.num_cliques)
    for k, block in enumerate(cover.cliques):
        sub = [arm_gaps[i] for i in block if i != best]
        clique_gaps[k] = min(sub) if sub else 0.0
    positive = clique_gaps > 0
    z = float(np.sum(1.0 / clique_gaps[positive]))
    return arm_gaps, clique_gaps, z


def read_loss_csv(path) -> np.ndarray:
    """Read a ``t,loss_0,...,loss_{N-1}`` file; rows must be in round order starting at 1."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0].strip() != "t":
            raise ConfigError("loss CSV header must start with 't'")
        expected = [f"loss_{i}" for i in range(len(header) - 1)]
        if [h.strip() for h in header[1:]] != expected:
            raise ConfigError(f"loss CSV header must be t,{','.join(expected)}")
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if int(row[0]) != len(rows) + 1:
                raise ConfigError(f"line {lineno}: expected t={len(rows) + 1}, got {row[0]}")
            rows.append([float(x) for x in row[1:]])
    return np.array(rows, dtype=float)


def write_loss_csv(path, sequence) -> None:
    seq = np.asarray(sequence, dtype=float)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"loss_{i}" for i in range(seq.shape[1])])
        for t, row in enumerate(seq, 1):
            writer.writerow([t] + [repr(float(x)) for x in row])
