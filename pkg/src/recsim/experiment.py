"""Multi-run orchestration, binned curves, and cross-algorithm analyses.

A full experiment runs (training phase, deployment phase, metrics) for every
algorithm x seed pair.  Per-run seeds depend only on (master_seed, run
index), so all algorithms face the same sequence of worlds and differ only
in the recommendation signal.  Aggregation reduces runs in sorted key order,
making results independent of any execution parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.stats
from joblib import Parallel, delayed

from .config import ExperimentConfig
from .engine import ConsumptionLog, run_deployment_phase, run_training_phase
from .errors import DataError, RecsimError, UsageError
from .learner import Weights
from .metrics import MetricsReport, compute_report, summary_arrays
from .recommenders import ORIGINAL_SEVEN, AlgorithmKind
from .rng import STREAM_PAIRS, derive_run_seed, substream

#: Curve tables bin their x axis at this width.
DEFAULT_BIN_WIDTH = 3.0

#: Metric fields aggregated with confidence intervals.
METRIC_FIELDS = (
    "inter_user_diversity", "intra_user_diversity", "filter_bubble",
    "homogeneity", "alt_homogeneity", "natural_homogeneity",
    "mean_quality_component", "mean_affinity_component",
    "std_quality_component", "std_affinity_component",
)


@dataclass
class AggregateStat:
    """Mean over runs with a 95% t-interval (NaN bounds when n_runs = 1)."""

    mean: float
    ci_lo: float
    ci_hi: float

    def separated_above(self, other: "AggregateStat") -> bool:
        """True when this CI lies entirely above the other's."""
        return self.ci_lo > other.ci_hi


@dataclass
class BinnedCurve:
    algorithm: str
    bin_lo: np.ndarray
    bin_hi: np.ndarray
    count: np.ndarray
    mean: np.ndarray  # NaN in empty bins
    std: np.ndarray   # population std of member values; NaN in empty bins


@dataclass
class RunResults:
    config: ExperimentConfig
    algorithms: list[AlgorithmKind]
    logs: dict[tuple[str, int], ConsumptionLog]
    reports: dict[tuple[str, int], MetricsReport]
    aggregates: dict[str, dict[str, AggregateStat]]
    weight_histories: dict[tuple[str, int], list[Weights]] = field(default_factory=dict)

    def runs_of(self, kind: AlgorithmKind) -> list[int]:
        return sorted(r for (name, r) in self.logs if name == kind.cli_name)


def run_single(config: ExperimentConfig, kind: AlgorithmKind, run_idx: int,
               collect_weights: bool = False
               ) -> tuple[ConsumptionLog, MetricsReport, list[Weights]]:
    """Training phase, deployment phase, and metrics for one seed."""
    seed = derive_run_seed(config.master_seed, run_idx)
    history: list[Weights] = []
    try:
        weights = run_training_phase(
            config, kind, seed, weight_history=history if collect_weights else None)
        log = run_deployment_phase(config, kind, weights, seed, run_id=run_idx)
    except RecsimError as exc:
        raise type(exc)(
            f"algorithm={kind.cli_name} seed_index={run_idx}: {exc}") from exc
    return log, compute_report(log), history


def run_experiment(config: ExperimentConfig, algorithms: list[AlgorithmKind],
                   n_jobs: int = 1, collect_weights: bool = False) -> RunResults:
    """Run every algorithm for n_runs seeds and aggregate the metrics."""
    config.validate()
    if not algorithms:
        raise UsageError("no algorithms requested")
    jobs = [(kind, r) for kind in algorithms for r in range(config.n_runs)]
    outputs = Parallel(n_jobs=n_jobs)(
        delayed(run_single)(config, kind, r, collect_weights) for kind, r in jobs)

    results = RunResults(config=config, algorithms=list(algorithms),
                         logs={}, reports={}, aggregates={})
    for (kind, r), (log, report, history) in zip(jobs, outputs):
        key = (kind.cli_name, r)
        results.logs[key] = log
        results.reports[key] = report
        if collect_weights:
            results.weight_histories[key] = history
    results.aggregates = aggregate_metrics(results.reports)
    return results


def aggregate_metrics(reports: dict[tuple[str, int], MetricsReport]
                      ) -> dict[str, dict[str, AggregateStat]]:
    """Per-algorithm mean and 95% t-interval of every metric field."""
    by_algo: dict[str, list[MetricsReport]] = {}
    for (name, _), report in sorted(reports.items()):
        by_algo.setdefault(name, []).append(report)
    out: dict[str, dict[str, AggregateStat]] = {}
    for name, reps in by_algo.items():
        out[name] = {}
        for fld in METRIC_FIELDS:
            xs = np.array([getattr(rep, fld) for rep in reps])
            mean = float(xs.mean())
            if len(xs) < 2:
                out[name][fld] = AggregateStat(mean, float("nan"), float("nan"))
            else:
                half = float(scipy.stats.t.ppf(0.975, len(xs) - 1)
                             * xs.std(ddof=1) / math.sqrt(len(xs)))
                out[name][fld] = AggregateStat(mean, mean - half, mean + half)
    return out


# -- binned curves -----------------------------------------------------------

def _binned(algorithm: str, xs: np.ndarray, ys: np.ndarray,
            bin_width: float) -> BinnedCurve:
    """Contiguous fixed-width bins [k*w, (k+1)*w) covering the x range."""
    if xs.size == 0:
        raise DataError("no points to bin")
    idx = np.floor(xs / bin_width).astype(np.int64)
    lo = int(idx.min())
    nbins = int(idx.max()) - lo + 1
    shifted = idx - lo
    count = np.bincount(shifted, minlength=nbins)
    sums = np.bincount(shifted, weights=ys, minlength=nbins)
    sq_sums = np.bincount(shifted, weights=ys * ys, minlength=nbins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, sums / np.maximum(count, 1), np.nan)
        var = np.clip(sq_sums / np.maximum(count, 1) - mean**2, 0.0, None)
        std = np.where(count > 0, np.sqrt(var), np.nan)
    edges = (lo + np.arange(nbins)) * bin_width
    return BinnedCurve(algorithm=algorithm, bin_lo=edges,
                       bin_hi=edges + bin_width, count=count, mean=mean, std=std)


def _algo_logs(results: RunResults, kind: AlgorithmKind) -> list[ConsumptionLog]:
    logs = [results.logs[(kind.cli_name, r)] for r in results.runs_of(kind)]
    if not logs:
        raise DataError(f"no runs recorded for {kind.cli_name}")
    return logs


def deviation_curve(results: RunResults, kind: AlgorithmKind,
                    bin_width: float = DEFAULT_BIN_WIDTH) -> BinnedCurve:
    """Mean (consumed-genre mean - preference) vs. binned preference,
    pooling the users of every run."""
    xs, ys = [], []
    for log in _algo_logs(results, kind):
        mu, _, prefs = summary_arrays(log)
        xs.append(prefs)
        ys.append(mu - prefs)
    return _binned(kind.cli_name, np.concatenate(xs), np.concatenate(ys), bin_width)


def variance_curve(results: RunResults, kind: AlgorithmKind,
                   bin_width: float = DEFAULT_BIN_WIDTH) -> BinnedCurve:
    """Mean consumed-genre variance vs. binned preference, pooled over runs."""
    xs, ys = [], []
    for log in _algo_logs(results, kind):
        _, var, prefs = summary_arrays(log)
        xs.append(prefs)
        ys.append(var)
    return _binned(kind.cli_name, np.concatenate(xs), np.concatenate(ys), bin_width)


def pairwise_distance_curve(results: RunResults, kind: AlgorithmKind,
                            pair_sample_size: int = 0,
                            bin_width: float = DEFAULT_BIN_WIDTH) -> BinnedCurve:
    """Total pairwise consumed-genre distance vs. binned preference distance.

    ``pair_sample_size`` > 0 samples that many user pairs per run (without
    replacement, deterministically from the run's substream); 0 uses every
    pair.
    """
    xs, ys = [], []
    for log in _algo_logs(results, kind):
        m = log.n_users
        genres = np.sort(log.item_genre[log.choices], axis=0)  # (T, m) per-user sorted
        prefix = np.vstack([np.zeros(m), np.cumsum(genres, axis=0)])
        a_idx, b_idx = np.triu_indices(m, k=1)
        if pair_sample_size and pair_sample_size < a_idx.size:
            gen = substream(results.config.master_seed, STREAM_PAIRS, log.run_id)
            sel = np.sort(gen.choice(a_idx.size, size=pair_sample_size, replace=False))
            a_idx, b_idx = a_idx[sel], b_idx[sel]
        T = log.n_rounds
        dist = np.empty(a_idx.size)
        for p in range(a_idx.size):
            a_col = genres[:, a_idx[p]]
            pos = np.searchsorted(a_col, genres[:, b_idx[p]])
            dist[p] = np.sum(genres[:, b_idx[p]] * (2 * pos - T)
                             + prefix[T, a_idx[p]] - 2 * prefix[pos, a_idx[p]])
        xs.append(np.abs(log.preferences[a_idx] - log.preferences[b_idx]))
        ys.append(dist)
    return _binned(kind.cli_name, np.concatenate(xs), np.concatenate(ys), bin_width)


def curve_height(curves: dict[str, BinnedCurve]) -> dict[str, float]:
    """Mean curve level over the bins populated by every listed algorithm."""
    if not curves:
        raise UsageError("no curves given")
    shared: set[int] | None = None
    for curve in curves.values():
        lo = np.round(curve.bin_lo / (curve.bin_hi - curve.bin_lo)).astype(int)
        populated = set(lo[curve.count > 0].tolist())
        shared = populated if shared is None else shared & populated
    if not shared:
        raise DataError("algorithms share no populated bins")
    heights = {}
    for name, curve in curves.items():
        lo = np.round(curve.bin_lo / (curve.bin_hi - curve.bin_lo)).astype(int)
        keep = np.isin(lo, sorted(shared))
        heights[name] = float(np.mean(curve.mean[keep]))
    return heights


# -- correlation / ranking ---------------------------------------------------

def pearson(xs, ys) -> float:
    """Pearson r; NaN if either side has (numerically) zero variance."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise UsageError("pearson needs two equal-length 1-D sequences")
    if len(xs) < 3:
        raise UsageError(f"pearson needs at least 3 points, got {len(xs)}")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0.0:
        return float("nan")
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def ranking_consistency(metric_a: dict[str, float], metric_b: dict[str, float]
                        ) -> tuple[float, bool]:
    """Kendall tau-b between two per-algorithm metrics, plus whether their
    descending orders coincide exactly."""
    if set(metric_a) != set(metric_b):
        raise UsageError("the two metrics cover different algorithm sets")
    names = sorted(metric_a)
    if len(names) < 2:
        raise UsageError("ranking comparison needs at least 2 algorithms")
    a = [metric_a[n] for n in names]
    b = [metric_b[n] for n in names]
    tau = float(scipy.stats.kendalltau(a, b).statistic)
    order_a = sorted(names, key=lambda n: (-metric_a[n], n))
    order_b = sorted(names, key=lambda n: (-metric_b[n], n))
    return tau, order_a == order_b


def _homogeneity_points(results: RunResults, attr: str) -> tuple[list[float], list[float]]:
    """(homogeneity-style metric, natural homogeneity) per-run points over
    whichever of the seven core algorithms are present."""
    xs, ys = [], []
    for kind in ORIGINAL_SEVEN:
        for r in results.runs_of(kind):
            rep = results.reports[(kind.cli_name, r)]
            xs.append(getattr(rep, attr))
            ys.append(rep.natural_homogeneity)
    return xs, ys


def _homogeneity_algo_means(results: RunResults, attr: str) -> tuple[list[float], list[float]]:
    xs, ys = [], []
    for kind in ORIGINAL_SEVEN:
        if results.runs_of(kind):
            agg = results.aggregates[kind.cli_name]
            xs.append(agg[attr].mean)
            ys.append(agg["natural_homogeneity"].mean)
    return xs, ys


def comparison_summary(results: RunResults, pair_sample_size: int = 0) -> dict:
    """Correlation and ranking summary (the `compare` output).

    Homogeneity correlations use per-run points of the core seven
    algorithms; algorithm-mean variants are included alongside.  The ranking
    check orders those algorithms by mean filter-bubble ratio and by
    pairwise-distance curve height.
    """
    present = [k for k in ORIGINAL_SEVEN if results.runs_of(k)]
    out: dict = {
        "pearson_homogeneity": None, "pearson_alt_homogeneity": None,
        "pearson_homogeneity_algo_means": None, "pearson_alt_homogeneity_algo_means": None,
        "kendall_tau": None, "exact_ranking_match": None,
        "algorithms": {},
    }
    for name, aggs in sorted(results.aggregates.items()):
        out["algorithms"][name] = {
            fld: {"mean": _json_float(stat.mean),
                  "ci_lo": _json_float(stat.ci_lo),
                  "ci_hi": _json_float(stat.ci_hi)}
            for fld, stat in aggs.items()
        }
    if len(present) >= 2:
        xs, ys = _homogeneity_points(results, "homogeneity")
        if len(xs) >= 3:
            out["pearson_homogeneity"] = _json_float(pearson(xs, ys))
        xs, ys = _homogeneity_points(results, "alt_homogeneity")
        if len(xs) >= 3:
            out["pearson_alt_homogeneity"] = _json_float(pearson(xs, ys))
        xs, ys = _homogeneity_algo_means(results, "homogeneity")
        if len(xs) >= 3:
            out["pearson_homogeneity_algo_means"] = _json_float(pearson(xs, ys))
        xs, ys = _homogeneity_algo_means(results, "alt_homogeneity")
        if len(xs) >= 3:
            out["pearson_alt_homogeneity_algo_means"] = _json_float(pearson(xs, ys))
        fb = {k.cli_name: results.aggregates[k.cli_name]["filter_bubble"].mean
              for k in present}
        curves = {k.cli_name: pairwise_distance_curve(results, k, pair_sample_size)
                  for k in present}
        heights = curve_height(curves)
        tau, exact = ranking_consistency(fb, heights)
        out["kendall_tau"] = _json_float(tau)
        out["exact_ranking_match"] = exact
    return out


def _json_float(x: float) -> float | None:
    """NaN/inf become None so the summary stays strict JSON."""
    return float(x) if math.isfinite(x) else None
