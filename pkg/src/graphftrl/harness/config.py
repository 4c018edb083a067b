"""Experiment configuration: a TOML document mapped onto :class:`ExperimentConfig`.

Schema (``schema_version = 1``)::

    horizon = 20000                   # T >= 1
    seeds = [0, 1, 2]                 # or "0..19" (inclusive range)
    algorithm = "graph_ftrl"          # or "tsallis_inf"
    trace_detail = "summary"          # or "full" (stores every p_t; O(NT) memory)
    output = "results"                # directory for run artifacts

    [graph]                           # either file = "graph.txt" or a generator
    generator = "disjoint_cliques"    # complete | edgeless | disjoint_cliques | cycle
    sizes = [2, 2, 2, 2, 2]           #   | complete_bipartite | erdos_renyi
    # n = 6; a = 2; b = 3; p = 0.3; seed = 0   (generator-specific)

    [cover]
    source = "greedy"                 # greedy | exact | file | blocks | explicit
    # file = "cover.txt"; cliques = [[0, 1], [2]]

    [environment]
    regime = "stochastic"             # stochastic | corrupted | adversarial
    means = [0.25, 0.5, ...]
    family = "bernoulli"              # or "uniform" (with width = 0.1)
    [environment.corruption]          # corrupted regime only
    strategy = "flip_best"            # flip_best | random_burst
    budget = 200
    # adversarial: pattern = "alternating" | "sinusoidal" | "fixed"; block, arms,
    # low, high, amplitude, period, noise, file (CSV t,loss_0,...)

    [params]                          # optional overrides of the defaults
    # alpha = ...; beta = 9; gamma = ...; eta_scale = 1.0

    [monitors]
    stability_ratio = true
    shifted_loss = true
    bound_rhs = true

Relative file paths resolve against the config file's directory.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .. import graph as graphs
from ..entropy import InverseSqrtSchedule, RegularizerParams
from ..environments import (AdversarialEnvironment, AdversarialSpec, CorruptionSpec, Environment,
                            StochasticEnvironment, StochasticSpec, read_loss_csv)
from ..errors import ConfigError, GraphFTRLError
from ..learner import default_params

SCHEMA_VERSION = 1
ALGORITHMS = ("graph_ftrl", "tsallis_inf")
DETAIL_LEVELS = ("summary", "full")


@dataclass(frozen=True)
class Monitors:
    stability_ratio: bool = True
    shifted_loss: bool = True
    bound_rhs: bool = True

    @property
    def needs_plus(self) -> bool:
        return self.stability_ratio or self.shifted_loss or self.bound_rhs


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    graph: graphs.FeedbackGraph
    cover: graphs.CliqueCover
    environment: dict
    horizon: int
    algorithm: str = "graph_ftrl"
    seeds: tuple = (0,)
    monitors: Monitors = Monitors()
    trace_detail: str = "summary"
    output: Optional[Path] = None
    param_overrides: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.trace_detail not in DETAIL_LEVELS:
            raise ConfigError(f"trace_detail must be one of {DETAIL_LEVELS}")
        check = graphs.validate_cover(self.graph, self.cover)
        if not check:
            raise ConfigError(f"invalid cover: {check.message}")
        # fail early on infeasible or malformed parameters and environments
        self.params()
        self.make_environment()

    @property
    def num_arms(self) -> int:
        return self.graph.num_arms

    def params(self) -> RegularizerParams:
        params = default_params(self.num_arms, self.horizon)
        over = dict(self.param_overrides)
        unknown = set(over) - {"alpha", "beta", "gamma", "eta_scale"}
        if unknown:
            raise ConfigError(f"unknown params keys: {sorted(unknown)}")
        scale = over.pop("eta_scale", None)
        try:
            params = replace(params, **{k: float(v) for k, v in over.items()})
            if scale is not None:
                params = replace(params, eta_schedule=InverseSqrtSchedule(float(scale)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if params.gamma * self.num_arms > 1.0 + 1e-12:
            raise ConfigError(f"gamma={params.gamma} exceeds 1/N={1.0 / self.num_arms}: truncated simplex is empty")
        return params

    def make_environment(self) -> Environment:
        return build_environment(self.environment, self.num_arms, self.base_dir)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def parse_seeds(value) -> tuple:
    if isinstance(value, int):
        return (value,)
    if isinstance(value, str):
        if ".." not in value:
            raise ConfigError(f"seed range must look like 'A..B', got {value!r}")
        lo, hi = value.split("..", 1)
        try:
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise ConfigError(f"bad seed range {value!r}") from None
        if hi < lo:
            raise ConfigError(f"empty seed range {value!r}")
        return tuple(range(lo, hi + 1))
    try:
        return tuple(int(s) for s in value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad seeds value {value!r}") from None


def build_graph(spec: dict, base_dir: Path):
    """Returns (graph, cover-from-file-or-None)."""
    if "file" in spec:
        return graphs.read_graph(base_dir / spec["file"])
    gen = spec.get("generator")
    try:
        if gen == "complete":
            return graphs.complete_graph(int(spec["n"])), None
        if gen == "edgeless":
            return graphs.edgeless_graph(int(spec["n"])), None
        if gen == "disjoint_cliques":
            return graphs.disjoint_cliques([int(s) for s in spec["sizes"]]), None
        if gen == "cycle":
            return graphs.cycle_graph(int(spec["n"])), None
        if gen == "complete_bipartite":
            return graphs.complete_bipartite(int(spec["a"]), int(spec["b"])), None
        if gen == "erdos_renyi":
            rng = np.random.default_rng(int(spec.get("seed", 0)))
            return graphs.erdos_renyi(int(spec["n"]), float(spec["p"]), rng), None
    except KeyError as exc:
        raise ConfigError(f"graph generator {gen!r} needs parameter {exc}") from None
    raise ConfigError(f"unknown graph generator {gen!r}")


def build_cover(spec: dict, graph, file_cover, base_dir: Path):
    source = spec.get("source", "file" if file_cover is not None else "greedy")
    if source == "greedy":
        return graphs.greedy_clique_cover(graph)
    if source == "exact":
        return graphs.exact_min_cover(graph)
    if source == "explicit":
        return graphs.CliqueCover.from_cliques(spec["cliques"], graph.num_arms)
    if source == "blocks":
        return graphs.block_cover([int(s) for s in spec["sizes"]])
    if source == "file":
        if "file" in spec:
            _, cover = graphs.read_graph(base_dir / spec["file"])
        else:
            cover = file_cover
        if cover is None:
            raise ConfigError("cover source 'file' but no clique lines were found")
        return cover
    raise ConfigError(f"unknown cover source {source!r}")


def build_environment(spec: dict, num_arms: int, base_dir: Path = Path(".")) -> Environment:
    regime = spec.get("regime", "stochastic")
    try:
        if regime in ("stochastic", "corrupted"):
            means = np.asarray(spec["means"], dtype=float)
            if means.size != num_arms:
                raise ConfigError(f"{means.size} means given for {num_arms} arms")
            stoch = StochasticSpec(means, spec.get("family", "bernoulli"), float(spec.get("width", 0.1)))
            corruption = CorruptionSpec()
            if regime == "corrupted":
                c = spec.get("corruption", {})
                corruption = CorruptionSpec(float(c.get("budget", 0.0)), c.get("strategy", "flip_best"))
            return StochasticEnvironment(stoch, corruption)
        if regime == "adversarial":
            kwargs: dict[str, Any] = {k: spec[k] for k in
                                      ("block", "low", "high", "amplitude", "period", "noise") if k in spec}
            if "arms" in spec:
                kwargs["arms"] = tuple(spec["arms"])
            pattern = spec.get("pattern", "alternating")
            if pattern == "fixed":
                kwargs["sequence"] = read_loss_csv(base_dir / spec["file"])
            return AdversarialEnvironment(AdversarialSpec(pattern, num_arms, **kwargs))
    except KeyError as exc:
        raise ConfigError(f"environment needs key {exc}") from None
    except GraphFTRLError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad environment: {exc}") from None
    raise ConfigError(f"unknown regime {regime!r}")


def config_from_dict(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    known = {"schema_version", "horizon", "seeds", "algorithm", "trace_detail", "output",
             "graph", "cover", "environment", "params", "monitors"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    try:
        graph, file_cover = build_graph(doc.get("graph", {}), base_dir)
        cover = build_cover(doc.get("cover", {}), graph, file_cover, base_dir)
        monitors = Monitors(**doc.get("monitors", {}))
        output = doc.get("output")
        return ExperimentConfig(
            graph=graph,
            cover=cover,
            environment=dict(doc.get("environment", {})),
            horizon=int(doc["horizon"]),
            algorithm=doc.get("algorithm", "graph_ftrl"),
            seeds=parse_seeds(doc.get("seeds", [0])),
            monitors=monitors,
            trace_detail=doc.get("trace_detail", "summary"),
            output=None if output is None else base_dir / output,
            param_overrides=dict(doc.get("params", {})),
            base_dir=base_dir,
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"missing key {exc}") from None
    except (GraphFTRLError, TypeError, ValueError, IndexError, OSError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from None
    return config_from_dict(doc, path.parent)


def nt_threshold_met(num_arms: int, horizon: int) -> bool:
    """The explicit-constant bound applies for NT >= 3^11."""
    return num_arms * horizon >= 3 ** 11


def log_nt(num_arms: int, horizon: int) -> float:
    return math.log(num_arms * horizon)
