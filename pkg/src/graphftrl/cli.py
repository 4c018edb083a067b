"""Command-line entry point: ``graphftrl {run,sweep,aggregate,check,cover}``.

Exit codes: 0 success, 1 invariant violation or failed run, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, GraphFTRLError
from .graph import exact_min_cover, format_graph, greedy_clique_cover, read_graph
from .harness.checks import run_checks
from .harness.config import load_config, nt_threshold_met, parse_seeds
from .harness.diagnostics import aggregate, bound_rhs
from .harness.io import read_trace_csv, write_summary_json, write_trace_csv
from .harness.run import run_experiment, run_sweep

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
log = logging.getLogger("graphftrl")


def _out_dir(args, config) -> Path:
    out = Path(args.out) if getattr(args, "out", None) else (config.output or Path("results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _bound_check(config, results) -> tuple[dict, bool]:
    """Seed-averaged regret against the explicit bound; skipped outside its validity range."""
    if not (config.monitors.bound_rhs and config.algorithm == "graph_ftrl"):
        return {}, True
    if results[0].trace.regime == "adversarial":
        return {}, True
    if any(r.summary.failed_round is not None for r in results):
        return {}, True
    N, T = config.num_arms, config.horizon
    if not nt_threshold_met(N, T):
        log.warning("NT = %d < 3^11: regret bound check skipped", N * T)
        return {}, True
    rhs = bound_rhs([r.trace for r in results], config.cover, results[0].trace.best_arm)
    mean = float(np.mean([r.summary.final_regret for r in results]))
    ok = mean <= rhs
    if not ok:
        log.error("mean regret %.3f exceeds the bound %.3f", mean, rhs)
    return {"bound_rhs": rhs, "mean_regret": mean, "bound_ok": ok}, ok


def _report(result) -> bool:
    s = result.summary
    print(f"seed {s.seed}: regret {s.final_regret:.4f}, rounds {s.rounds_completed}/{s.horizon}, "
          f"violations {s.violations}, max ratio {s.max_stability_ratio:.4f}, {s.wall_time:.1f}s")
    if s.error:
        print(f"seed {s.seed}: failed at round {s.failed_round}: {s.error}", file=sys.stderr)
    return s.ok


def cmd_run(args) -> int:
    config = load_config(args.config)
    seed = config.seeds[0] if args.seed is None else args.seed
    out = _out_dir(args, config)
    result = run_experiment(config, seed)
    ok = _report(result)
    bound, bound_ok = _bound_check(config, [result])
    write_trace_csv(result.trace, out / f"trace_seed{seed}.csv")
    write_summary_json(result.summary, out / f"summary_seed{seed}.json", **bound)
    return EXIT_OK if ok and bound_ok else EXIT_VIOLATION


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    seeds = parse_seeds(args.seeds) if args.seeds else config.seeds
    out = _out_dir(args, config)
    results = run_sweep(config, seeds, workers=args.workers)
    ok = all([_report(r) for r in results])
    for r in results:
        write_trace_csv(r.trace, out / f"trace_seed{r.summary.seed}.csv")
        write_summary_json(r.summary, out / f"summary_seed{r.summary.seed}.json")
    if ok:
        agg = aggregate([np.cumsum(r.trace.regret_increment) for r in results], [r.summary for r in results])
        agg.write_csv(out / "aggregate.csv")
        agg.write_table_csv(out / "summaries.csv")
        print(f"mean final regret {agg.final_mean:.4f} over {len(results)} seeds")
    bound, bound_ok = _bound_check(config, results) if ok else ({}, True)
    if bound:
        print(f"bound check: mean regret {bound['mean_regret']:.2f} <= {bound['bound_rhs']:.2f}: {bound_ok}")
    return EXIT_OK if ok and bound_ok else EXIT_VIOLATION


def cmd_aggregate(args) -> int:
    files = sorted(Path(args.inputs).glob("trace_seed*.csv"))
    if not files:
        raise ConfigError(f"no trace_seed*.csv files in {args.inputs}")
    curves = [read_trace_csv(f)["regret"] for f in files]
    agg = aggregate(curves)
    out = Path(args.out) if args.out else Path(args.inputs) / "aggregate.csv"
    agg.write_csv(out)
    print(f"{len(files)} traces, mean final regret {agg.final_mean:.4f} -> {out}")
    return EXIT_OK


def cmd_check(args) -> int:
    ok = True
    for result in run_checks():
        print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail}")
        ok &= bool(result.passed)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_cover(args) -> int:
    try:
        graph, _ = read_graph(args.graph)
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read graph {args.graph}: {exc}") from None
    cover = exact_min_cover(graph) if args.exact else greedy_clique_cover(graph)
    sys.stdout.write(format_graph(graph, cover))
    print(f"{cover.num_cliques} cliques", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphftrl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one run of a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one run per seed, then aggregate")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", help="inclusive range A..B (default: the config's seeds)")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, help="worker processes (capped by GBL_THREADS)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("aggregate", help="mean/std regret curve from a directory of traces")
    p.add_argument("--inputs", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("check", help="formula, solver and estimator self-checks")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cover", help="clique cover of a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--exact", action="store_true", help="minimum cover (N <= 12)")
    p.set_defaults(func=cmd_cover)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GraphFTRLError as exc:
        # malformed graph files and oversized exact covers are input errors too
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
