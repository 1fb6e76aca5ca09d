#!/usr/bin/env python3
"""Run the reduced-profile sweep once, persist everything, and print the
acceptance report.

Writes per-run consumption logs, the metrics table, all three curve
tables, the comparison summary, and a manifest into OUT_DIR, then
evaluates each acceptance criterion against the same in-memory results.

Usage:
    python3 scripts/run_desk_sweep.py OUT_DIR [--jobs N] [--seeds N]
"""

import argparse
import json
import os
import sys
import time

from recsim import storage
from recsim.acceptance import evaluate_all
from recsim.config import desk_config
from recsim.experiment import (comparison_summary, deviation_curve,
                               pairwise_distance_curve, run_experiment,
                               variance_curve)
from recsim.recommenders import ALL_KINDS


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seeds", type=int, default=None,
                        help="override runs per algorithm (default 8)")
    args = parser.parse_args()

    config = desk_config()
    if args.seeds is not None:
        config.n_runs = args.seeds
    config.validate()
    os.makedirs(args.out_dir, exist_ok=True)

    print(f"sweep: m={config.m}, T={config.T}, "
          f"{config.n_runs} runs x {len(ALL_KINDS)} algorithms")
    t0 = time.perf_counter()
    results = run_experiment(config, list(ALL_KINDS), n_jobs=args.jobs)
    sweep_s = time.perf_counter() - t0
    print(f"sweep finished in {sweep_s:.1f}s")

    files: dict = {"metrics": storage.METRICS_NAME, "runs": {}}
    for kind in results.algorithms:
        files["runs"][kind.cli_name] = {}
    for key in sorted(results.logs):
        entry = storage.write_consumption_csvs(args.out_dir, results.logs[key])
        files["runs"][key[0]][str(key[1])] = entry
    storage.write_metrics_csv(os.path.join(args.out_dir, storage.METRICS_NAME),
                              results.reports)

    builders = {"deviation": deviation_curve, "variance": variance_curve,
                "pairwise": pairwise_distance_curve}
    for curve_kind, build in builders.items():
        curves = [build(results, kind) for kind in results.algorithms]
        storage.write_curves_csv(
            os.path.join(args.out_dir, storage.curves_filename(curve_kind)),
            curves)

    summary = comparison_summary(results)
    with open(os.path.join(args.out_dir, "compare.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    storage.write_manifest(args.out_dir, config,
                           [k.cli_name for k in results.algorithms], files,
                           {"sweep": sweep_s})
    print(f"wrote {len(results.logs)} runs to {args.out_dir}")

    outcomes = evaluate_all(results)
    for outcome in outcomes:
        print(outcome.line())
    n_pass = sum(o.passed for o in outcomes)
    print(f"{n_pass}/{len(outcomes)} criteria passed")
    return 0 if n_pass == len(outcomes) else 1


if __name__ == "__main__":
    sys.exit(main())
