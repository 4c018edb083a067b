"""Experiment configuration, execution, diagnostics and output."""

from .config import ExperimentConfig, Monitors, config_from_dict, load_config
from .run import RunResult, RunSummary, Trace, TraceRecord, rng_streams, run_experiment, run_sweep
