"""CSV traces and JSON run summaries, both versioned."""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from ..errors import ConfigError

SCHEMA_VERSION = 1


def trace_columns(trace) -> tuple[list, np.ndarray]:
    K = trace.marginals.shape[1]
    names = ["t", "arm", "loss", "regret"] + [f"marg_{k}" for k in range(K)] + ["clean_loss", "consumed"]
    cols = [trace.t, trace.arm, trace.loss, np.cumsum(trace.regret_increment), *trace.marginals.T,
            trace.clean_loss, trace.consumed]
    if trace.plus_marginals is not None:
        names += [f"plus_marg_{k}" for k in range(K)]
        cols += list(trace.plus_marginals.T)
    if trace.probs is not None:
        names += [f"p_{i}" for i in range(trace.probs.shape[1])]
        cols += list(trace.probs.T)
    return names, np.column_stack(cols) if len(trace) else np.zeros((0, len(names)))


def write_trace_csv(trace, path) -> None:
    """One row per round; ``regret`` is cumulative. The first line is a schema comment."""
    names, data = trace_columns(trace)
    fmt = ["%d", "%d"] + ["%.17g"] * (len(names) - 2)
    header = f"# schema_version={SCHEMA_VERSION}\n" + ",".join(names)
    np.savetxt(path, data, fmt=fmt, delimiter=",", header=header, comments="")


def read_trace_csv(path) -> dict:
    """Columns of a trace CSV by name."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
        header = fh.readline().strip()
    if first != f"# schema_version={SCHEMA_VERSION}":
        raise ConfigError(f"{path}: unsupported trace schema line {first!r}")
    names = header.split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    if data.size == 0:
        data = np.zeros((0, len(names)))
    return {name: data[:, j] for j, name in enumerate(names)}


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        return _clean(value.item())
    return value


def summary_document(summary, **extra) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, **dataclasses.asdict(summary), **extra}
    return _clean(doc)


def write_summary_json(summary, path, **extra) -> None:
    """Non-finite floats are written as null."""
    Path(path).write_text(json.dumps(summary_document(summary, **extra), indent=2, sort_keys=True) + "\n")


def read_summary_json(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported summary schema_version {doc.get('schema_version')}")
    return doc
