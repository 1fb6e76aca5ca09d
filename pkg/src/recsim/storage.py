"""CSV and manifest persistence for experiment outputs.

Every float is serialized with 17 significant digits so files round-trip
IEEE doubles exactly: recomputing metrics from stored logs reproduces the
stored metrics byte for byte.  Undefined values are written as ``nan``.

An output directory contains per-run consumption logs with companion item
and preference tables, one pooled metrics table, optional fitted-weight
traces, curve tables, and a ``manifest.json`` written last so that an
interrupted run never looks complete.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_to_dict, fmt_float
from .engine import ConsumptionLog
from .errors import DataError
from .experiment import BinnedCurve, RunResults, aggregate_metrics
from .learner import Weights
from .metrics import MetricsReport
from .recommenders import AlgorithmKind

MANIFEST_NAME = "manifest.json"
METRICS_NAME = "metrics.csv"

METRICS_HEADER = ("algorithm,run_id,inter,intra,filter_bubble,homogeneity,"
                  "alt_homogeneity,natural_homogeneity,mean_q,mean_aff,std_q,std_aff")
LOG_HEADER = "run_id,algorithm,round,user_id,item_id"
ITEMS_HEADER = "run_id,item_id,quality,genre,birth_round"
PREFS_HEADER = "run_id,user_id,preference"
CURVES_HEADER = "algorithm,bin_lo,bin_hi,count,mean,std"
WEIGHTS_HEADER = "round,w0,w_quality,w_distance,w_rec1,w_rec2"

#: MetricsReport attribute behind each metrics.csv column, in column order.
_METRIC_COLUMNS = (
    ("inter", "inter_user_diversity"),
    ("intra", "intra_user_diversity"),
    ("filter_bubble", "filter_bubble"),
    ("homogeneity", "homogeneity"),
    ("alt_homogeneity", "alt_homogeneity"),
    ("natural_homogeneity", "natural_homogeneity"),
    ("mean_q", "mean_quality_component"),
    ("mean_aff", "mean_affinity_component"),
    ("std_q", "std_quality_component"),
    ("std_aff", "std_affinity_component"),
)


def log_filename(algorithm: str, run_id: int) -> str:
    return f"log_{algorithm}_{run_id:03d}.csv"


def items_filename(algorithm: str, run_id: int) -> str:
    return f"items_{algorithm}_{run_id:03d}.csv"


def prefs_filename(algorithm: str, run_id: int) -> str:
    return f"prefs_{algorithm}_{run_id:03d}.csv"


def weights_filename(algorithm: str, run_id: int) -> str:
    return f"weights_{algorithm}_{run_id:03d}.csv"


def curves_filename(curve_kind: str) -> str:
    return f"curves_{curve_kind}.csv"


# -- consumption logs --------------------------------------------------------

def write_consumption_csvs(out_dir: str, log: ConsumptionLog) -> dict[str, str]:
    """Write the log, item table, and preference table; return their names."""
    algo = log.algorithm.cli_name
    names = {
        "log": log_filename(algo, log.run_id),
        "items": items_filename(algo, log.run_id),
        "prefs": prefs_filename(algo, log.run_id),
    }
    rid = log.run_id
    with open(os.path.join(out_dir, names["log"]), "w", encoding="utf-8") as fh:
        fh.write(LOG_HEADER + "\n")
        for t in range(log.n_rounds):
            row = log.choices[t]
            fh.writelines(
                f"{rid},{algo},{t + 1},{j},{row[j]}\n" for j in range(log.n_users))
    with open(os.path.join(out_dir, names["items"]), "w", encoding="utf-8") as fh:
        fh.write(ITEMS_HEADER + "\n")
        fh.writelines(
            f"{rid},{i},{fmt_float(log.item_quality[i])},"
            f"{fmt_float(log.item_genre[i])},{log.item_birth_round[i]}\n"
            for i in range(len(log.item_quality)))
    with open(os.path.join(out_dir, names["prefs"]), "w", encoding="utf-8") as fh:
        fh.write(PREFS_HEADER + "\n")
        fh.writelines(
            f"{rid},{j},{fmt_float(log.preferences[j])}\n"
            for j in range(log.n_users))
    return names


def _read_rows(path: str, header: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != header:
            raise DataError(f"{path}: expected header {header!r}, got {first!r}")
        return [line.rstrip("\n").split(",") for line in fh if line.strip()]


def read_consumption_csvs(out_dir: str, algorithm: str, run_id: int) -> ConsumptionLog:
    """Rebuild a ConsumptionLog from its three CSV files."""
    log_rows = _read_rows(os.path.join(out_dir, log_filename(algorithm, run_id)),
                          LOG_HEADER)
    item_rows = _read_rows(os.path.join(out_dir, items_filename(algorithm, run_id)),
                           ITEMS_HEADER)
    pref_rows = _read_rows(os.path.join(out_dir, prefs_filename(algorithm, run_id)),
                           PREFS_HEADER)
    if not log_rows or not item_rows or not pref_rows:
        raise DataError(f"empty consumption files for {algorithm} run {run_id}")

    m = len(pref_rows)
    T = max(int(r[2]) for r in log_rows)
    if len(log_rows) != T * m:
        raise DataError(
            f"log for {algorithm} run {run_id} has {len(log_rows)} rows, "
            f"expected T*m = {T * m}")
    choices = np.zeros((T, m), dtype=np.int64)
    for rid, algo, rnd, user, item in log_rows:
        if algo != algorithm or int(rid) != run_id:
            raise DataError(f"log row tagged {algo}/{rid}, "
                            f"expected {algorithm}/{run_id}")
        choices[int(rnd) - 1, int(user)] = int(item)

    n = len(item_rows)
    quality = np.zeros(n)
    genre = np.zeros(n)
    birth = np.zeros(n, dtype=np.int64)
    for _, item, q, g, b in item_rows:
        i = int(item)
        quality[i], genre[i], birth[i] = float(q), float(g), int(b)
    prefs = np.zeros(m)
    for _, user, p in pref_rows:
        prefs[int(user)] = float(p)
    return ConsumptionLog(run_id=run_id,
                          algorithm=AlgorithmKind.from_cli_name(algorithm),
                          choices=choices, item_quality=quality,
                          item_genre=genre, item_birth_round=birth,
                          preferences=prefs)


# -- metrics table -----------------------------------------------------------

def metrics_csv_text(reports: dict[tuple[str, int], MetricsReport]) -> str:
    lines = [METRICS_HEADER]
    for (algo, rid) in sorted(reports):
        rep = reports[(algo, rid)]
        vals = ",".join(fmt_float(getattr(rep, attr)) for _, attr in _METRIC_COLUMNS)
        lines.append(f"{algo},{rid},{vals}")
    return "\n".join(lines) + "\n"


def write_metrics_csv(path: str, reports: dict[tuple[str, int], MetricsReport]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(metrics_csv_text(reports))


def read_metrics_csv(path: str) -> dict[tuple[str, int], MetricsReport]:
    out: dict[tuple[str, int], MetricsReport] = {}
    for row in _read_rows(path, METRICS_HEADER):
        algo, rid = row[0], int(row[1])
        fields = {attr: float(v)
                  for (_, attr), v in zip(_METRIC_COLUMNS, row[2:])}
        out[(algo, rid)] = MetricsReport(algorithm=algo, run_id=rid, **fields)
    return out


# -- curves and weights ------------------------------------------------------

def write_curves_csv(path: str, curves: list[BinnedCurve]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CURVES_HEADER + "\n")
        for c in curves:
            for b in range(len(c.count)):
                fh.write(f"{c.algorithm},{fmt_float(c.bin_lo[b])},"
                         f"{fmt_float(c.bin_hi[b])},{c.count[b]},"
                         f"{fmt_float(c.mean[b])},{fmt_float(c.std[b])}\n")


def read_curves_csv(path: str) -> dict[str, BinnedCurve]:
    rows = _read_rows(path, CURVES_HEADER)
    grouped: dict[str, list[list[str]]] = {}
    for row in rows:
        grouped.setdefault(row[0], []).append(row)
    out = {}
    for algo, rs in grouped.items():
        out[algo] = BinnedCurve(
            algorithm=algo,
            bin_lo=np.array([float(r[1]) for r in rs]),
            bin_hi=np.array([float(r[2]) for r in rs]),
            count=np.array([int(r[3]) for r in rs]),
            mean=np.array([float(r[4]) for r in rs]),
            std=np.array([float(r[5]) for r in rs]))
    return out


def write_weights_csv(path: str, history: list[Weights]) -> None:
    """One row per training round; absent signal columns are written as nan."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(WEIGHTS_HEADER + "\n")
        for rnd, wt in enumerate(history, start=1):
            padded = list(wt.w) + [float("nan")] * (4 - len(wt.w))
            vals = ",".join(fmt_float(v) for v in [wt.w0] + padded)
            fh.write(f"{rnd},{vals}\n")


# -- manifest ----------------------------------------------------------------

def manifest_path(out_dir: str) -> str:
    return os.path.join(out_dir, MANIFEST_NAME)


def write_manifest(out_dir: str, config: ExperimentConfig,
                   algorithms: list[str], files: dict,
                   timings_seconds: dict[str, float],
                   extra: dict | None = None) -> None:
    """Write manifest.json.  Call this after all data files exist: its
    presence is the completeness marker for the directory."""
    doc = {
        "tool": "recsim",
        "version": __version__,
        "complete": True,
        "master_seed": config.master_seed,
        "n_runs": config.n_runs,
        "algorithms": list(algorithms),
        "config": config_to_dict(config),
        "files": files,
        "timings_seconds": {k: round(v, 3) for k, v in timings_seconds.items()},
    }
    if extra:
        doc.update(extra)
    with open(manifest_path(out_dir), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(out_dir: str) -> dict:
    path = manifest_path(out_dir)
    if not os.path.exists(path):
        raise DataError(f"{out_dir}: no {MANIFEST_NAME} (incomplete or not a run directory)")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_results(out_dir: str) -> RunResults:
    """Reconstruct RunResults (logs, reports, aggregates) from a run directory."""
    doc = read_manifest(out_dir)
    config = ExperimentConfig(**doc["config"])
    algorithms = [AlgorithmKind.from_cli_name(a) for a in doc["algorithms"]]
    reports = read_metrics_csv(os.path.join(out_dir, METRICS_NAME))
    logs = {}
    for kind in algorithms:
        for rid in range(config.n_runs):
            logs[(kind.cli_name, rid)] = read_consumption_csvs(
                out_dir, kind.cli_name, rid)
    missing = set(logs) - set(reports)
    if missing:
        raise DataError(f"metrics table lacks rows for {sorted(missing)[:3]}...")
    return RunResults(config=config, algorithms=algorithms, logs=logs,
                      reports=reports, aggregates=aggregate_metrics(reports))
