"""Command-line interface.

Subcommands:

* ``run``        simulate selected algorithms and write an output directory
* ``metrics``    recompute the metrics table from stored consumption logs
* ``curves``     write binned deviation / variance / pairwise-distance curves
* ``compare``    write correlation and ranking summary across algorithms
* ``desk-check`` run the reduced-profile sweep and print acceptance results

The output directory defaults to the ``RECSIM_OUT_DIR`` environment variable
when ``--out-dir`` is omitted.  ``run`` refuses to write into a non-empty
directory unless ``--force`` is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__, storage
from .acceptance import evaluate_all
from .config import ExperimentConfig, default_config, desk_config, parse_config
from .engine import audit_log
from .errors import RecsimError, UsageError
from .experiment import (RunResults, aggregate_metrics, comparison_summary,
                         deviation_curve, pairwise_distance_curve, run_experiment,
                         variance_curve)
from .metrics import compute_report
from .recommenders import ALL_KINDS, AlgorithmKind

OUT_DIR_ENV = "RECSIM_OUT_DIR"


def _resolve_out_dir(args) -> str:
    out = args.out_dir or os.environ.get(OUT_DIR_ENV)
    if not out:
        raise UsageError(f"no output directory: pass --out-dir or set {OUT_DIR_ENV}")
    return out


def _parse_algorithms(spec: str) -> list[AlgorithmKind]:
    if spec.strip() == "all":
        return list(ALL_KINDS)
    kinds = []
    for name in spec.split(","):
        kind = AlgorithmKind.from_cli_name(name.strip())
        if kind in kinds:
            raise UsageError(f"algorithm {kind.cli_name!r} listed twice")
        kinds.append(kind)
    return kinds


def _build_config(args) -> ExperimentConfig:
    if args.config:
        config = parse_config(args.config)
    elif args.desk:
        config = desk_config()
    else:
        config = default_config()
    if args.seeds is not None:
        config.n_runs = args.seeds
    if args.master_seed is not None:
        config.master_seed = args.master_seed
    return config.validate()


def cmd_run(args) -> int:
    out_dir = _resolve_out_dir(args)
    config = _build_config(args)
    kinds = _parse_algorithms(args.algorithms)

    if os.path.isdir(out_dir) and os.listdir(out_dir):
        if not args.force:
            raise UsageError(
                f"{out_dir} is not empty; pass --force to overwrite it")
    os.makedirs(out_dir, exist_ok=True)

    merged = RunResults(config=config, algorithms=kinds, logs={}, reports={},
                        aggregates={})
    timings: dict[str, float] = {}
    files: dict = {"metrics": storage.METRICS_NAME, "runs": {}}
    t_all = time.perf_counter()
    for kind in kinds:
        t0 = time.perf_counter()
        part = run_experiment(config, [kind], n_jobs=args.jobs,
                              collect_weights=args.dump_weights)
        timings[kind.cli_name] = time.perf_counter() - t0
        merged.logs.update(part.logs)
        merged.reports.update(part.reports)
        merged.weight_histories.update(part.weight_histories)
        files["runs"][kind.cli_name] = {}
        for (name, rid) in sorted(part.logs):
            entry = storage.write_consumption_csvs(out_dir, part.logs[(name, rid)])
            if args.dump_weights:
                wname = storage.weights_filename(name, rid)
                storage.write_weights_csv(os.path.join(out_dir, wname),
                                          part.weight_histories[(name, rid)])
                entry["weights"] = wname
            files["runs"][kind.cli_name][str(rid)] = entry
        print(f"{kind.cli_name}: {config.n_runs} runs "
              f"in {timings[kind.cli_name]:.1f}s")
    merged.aggregates = aggregate_metrics(merged.reports)
    timings["total"] = time.perf_counter() - t_all

    storage.write_metrics_csv(os.path.join(out_dir, storage.METRICS_NAME),
                              merged.reports)
    storage.write_manifest(out_dir, config, [k.cli_name for k in kinds],
                           files, timings)
    print(f"wrote {len(merged.logs)} runs to {out_dir}")
    return 0


def cmd_metrics(args) -> int:
    out_dir = _resolve_out_dir(args)
    results = storage.load_results(out_dir)
    reports = {}
    for key, log in sorted(results.logs.items()):
        audit_log(log)
        reports[key] = compute_report(log)
    storage.write_metrics_csv(os.path.join(out_dir, storage.METRICS_NAME), reports)
    print(f"recomputed metrics for {len(reports)} runs -> "
          f"{os.path.join(out_dir, storage.METRICS_NAME)}")
    return 0


_CURVE_BUILDERS = {
    "deviation": lambda results, kind, args: deviation_curve(results, kind),
    "variance": lambda results, kind, args: variance_curve(results, kind),
    "pairwise": lambda results, kind, args: pairwise_distance_curve(
        results, kind, pair_sample_size=args.pair_sample),
}


def cmd_curves(args) -> int:
    out_dir = _resolve_out_dir(args)
    results = storage.load_results(out_dir)
    wanted = list(_CURVE_BUILDERS) if args.kind == "all" else [args.kind]
    for curve_kind in wanted:
        curves = [_CURVE_BUILDERS[curve_kind](results, kind, args)
                  for kind in results.algorithms]
        path = os.path.join(out_dir, storage.curves_filename(curve_kind))
        storage.write_curves_csv(path, curves)
        print(f"wrote {path}")
    return 0


def cmd_compare(args) -> int:
    out_dir = _resolve_out_dir(args)
    results = storage.load_results(out_dir)
    summary = comparison_summary(results, pair_sample_size=args.pair_sample)
    path = os.path.join(out_dir, "compare.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")
    for key in ("pearson_homogeneity", "pearson_alt_homogeneity", "kendall_tau", "exact_ranking_match"):
        print(f"{key}: {summary[key]}")
    return 0


def cmd_desk_check(args) -> int:
    config = desk_config()
    if args.seeds is not None:
        config.n_runs = args.seeds
    config.validate()
    print(f"running reduced profile: m={config.m}, T={config.T}, "
          f"{config.n_runs} runs x {len(ALL_KINDS)} algorithms")
    t0 = time.perf_counter()
    results = run_experiment(config, list(ALL_KINDS), n_jobs=args.jobs)
    print(f"sweep finished in {time.perf_counter() - t0:.1f}s")
    outcomes = evaluate_all(results, pair_sample_size=args.pair_sample,
                            rerun_check=not args.skip_rerun)
    for outcome in outcomes:
        print(outcome.line())
    n_pass = sum(o.passed for o in outcomes)
    print(f"{n_pass}/{len(outcomes)} criteria passed")
    return 0 if n_pass == len(outcomes) else 1


def _add_out_dir(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default=None,
                   help=f"output directory (default: ${OUT_DIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recsim",
        description="Agent-based simulator of recommendation-driven "
                    "consumption diversity.")
    parser.add_argument("--version", action="version",
                        version=f"recsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate and write an output directory")
    _add_out_dir(p_run)
    src = p_run.add_mutually_exclusive_group()
    src.add_argument("--config", default=None, help="key = value config file")
    src.add_argument("--desk", action="store_true",
                     help="use the reduced profile instead of full scale")
    p_run.add_argument("--algorithms", default="all",
                       help="comma-separated algorithm names, or 'all'")
    p_run.add_argument("--seeds", type=int, default=None,
                       help="override the number of runs per algorithm")
    p_run.add_argument("--master-seed", type=int, default=None,
                       help="override the master seed")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes (-1 = all cores)")
    p_run.add_argument("--force", action="store_true",
                       help="allow writing into a non-empty directory")
    p_run.add_argument("--dump-weights", action="store_true",
                       help="also write per-round fitted weights per run")
    p_run.set_defaults(func=cmd_run)

    p_metrics = sub.add_parser(
        "metrics", help="recompute metrics.csv from stored logs")
    _add_out_dir(p_metrics)
    p_metrics.set_defaults(func=cmd_metrics)

    p_curves = sub.add_parser("curves", help="write binned curve tables")
    _add_out_dir(p_curves)
    p_curves.add_argument("--kind", default="all",
                          choices=["deviation", "variance", "pairwise", "all"])
    p_curves.add_argument("--pair-sample", type=int, default=0,
                          help="user pairs sampled per run for the pairwise "
                               "curve (0 = all pairs)")
    p_curves.set_defaults(func=cmd_curves)

    p_compare = sub.add_parser(
        "compare", help="write correlation and ranking summary")
    _add_out_dir(p_compare)
    p_compare.add_argument("--pair-sample", type=int, default=0)
    p_compare.set_defaults(func=cmd_compare)

    p_desk = sub.add_parser(
        "desk-check", help="run the reduced-profile acceptance sweep")
    p_desk.add_argument("--seeds", type=int, default=None,
                        help="override runs per algorithm (default 8)")
    p_desk.add_argument("--jobs", type=int, default=1)
    p_desk.add_argument("--pair-sample", type=int, default=0)
    p_desk.add_argument("--skip-rerun", action="store_true",
                        help="skip the bit-identical replay criterion")
    p_desk.set_defaults(func=cmd_desk_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RecsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
