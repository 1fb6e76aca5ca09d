"""Acceptance criteria for the reduced-profile sweep.

Each criterion inspects a finished RunResults over all nine algorithms and
returns a pass/fail with a one-line numeric detail.  The same evaluators
back the ``desk-check`` CLI subcommand and the acceptance test module, so
both always agree on what passing means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .experiment import (RunResults, comparison_summary, pairwise_distance_curve,
                         pearson, run_single, _homogeneity_points)
from .metrics import pooled_genre_variance
from .recommenders import AlgorithmKind
from .storage import metrics_csv_text

POOLED_REL_TOL = 1e-9
PEARSON_HOMOGENEITY_MIN = 0.80
PEARSON_ALT_MIN = 0.95
INTRA_REL_TOL = 0.25
KENDALL_MIN = 0.71

_NONE = AlgorithmKind.NONE.cli_name
_HYBRID = AlgorithmKind.HYBRID.cli_name
_BINNED = AlgorithmKind.BINNED_CONSUMPTION.cli_name
_SKEWED = AlgorithmKind.SKEWED_TOP_PICK.cli_name


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"C{self.number} {self.name}: {status} ({self.detail})"


def _stat(results: RunResults, algo: str, metric: str):
    return results.aggregates[algo][metric]


def _below(results: RunResults, algo: str, other: str, metric: str) -> bool:
    """CI of algo's metric entirely below CI of other's."""
    return _stat(results, other, metric).separated_above(_stat(results, algo, metric))


def _above(results: RunResults, algo: str, other: str, metric: str) -> bool:
    return _stat(results, algo, metric).separated_above(_stat(results, other, metric))


def _overlaps(results: RunResults, algo: str, other: str, metric: str) -> bool:
    a, b = _stat(results, algo, metric), _stat(results, other, metric)
    return not (a.ci_hi < b.ci_lo or b.ci_hi < a.ci_lo)


def criterion_1(results: RunResults) -> CriterionResult:
    """Law of total variance: pooled genre variance equals inter + intra."""
    worst = 0.0
    for key, log in sorted(results.logs.items()):
        rep = results.reports[key]
        pooled = pooled_genre_variance(log)
        total = rep.inter_user_diversity + rep.intra_user_diversity
        rel = abs(pooled - total) / max(abs(pooled), 1e-300)
        worst = max(worst, rel)
    return CriterionResult(1, "variance-decomposition-identity", worst <= POOLED_REL_TOL,
                           f"max relative error {worst:.3e} over {len(results.logs)} runs")


def criterion_2(results: RunResults) -> CriterionResult:
    """Both homogeneity variants track natural homogeneity across runs."""
    xs, ys = _homogeneity_points(results, "homogeneity")
    r_main = pearson(xs, ys)
    xs, ys = _homogeneity_points(results, "alt_homogeneity")
    r_alt = pearson(xs, ys)
    ok = r_main >= PEARSON_HOMOGENEITY_MIN and r_alt >= PEARSON_ALT_MIN
    return CriterionResult(2, "homogeneity-correlations", ok,
                           f"pearson {r_main:.4f} (need >= {PEARSON_HOMOGENEITY_MIN}), "
                           f"alt {r_alt:.5f} (need >= {PEARSON_ALT_MIN})")


def criterion_3(results: RunResults) -> CriterionResult:
    """Consumption-driven algorithms cut between-user spread, leave
    within-user spread roughly unchanged."""
    checks = []
    for algo in ("consumption", "svd", "hybrid"):
        inter_ok = _below(results, algo, _NONE, "inter_user_diversity")
        base = _stat(results, _NONE, "intra_user_diversity").mean
        rel = abs(_stat(results, algo, "intra_user_diversity").mean - base) / abs(base)
        checks.append((algo, inter_ok, rel))
    ok = all(i and r <= INTRA_REL_TOL for _, i, r in checks)
    detail = "; ".join(f"{a}: inter-below={i}, intra-shift {r:.1%}" for a, i, r in checks)
    return CriterionResult(3, "popularity-feedback-direction", ok, detail)


def criterion_4(results: RunResults) -> CriterionResult:
    """Oracle personalization raises the filter-bubble ratio; the quality
    oracle homogenizes users while widening individual menus."""
    tg = _above(results, "true-genre", _NONE, "filter_bubble")
    pf = _above(results, "perfect", _NONE, "filter_bubble")
    tq_inter = _below(results, "true-quality", _NONE, "inter_user_diversity")
    tq_intra = _above(results, "true-quality", _NONE, "intra_user_diversity")
    ok = tg and pf and tq_inter and tq_intra
    return CriterionResult(4, "oracle-signal-directions", ok,
                           f"true-genre fb-above={tg}, perfect fb-above={pf}, "
                           f"true-quality inter-below={tq_inter} intra-above={tq_intra}")


def criterion_5(results: RunResults) -> CriterionResult:
    """The two added algorithms move diversity in their designed directions."""
    b_intra_none = _above(results, _BINNED, _NONE, "intra_user_diversity")
    b_intra_hyb = _above(results, _BINNED, _HYBRID, "intra_user_diversity")
    b_inter = _below(results, _BINNED, _NONE, "inter_user_diversity")
    b_fb = _below(results, _BINNED, _NONE, "filter_bubble")
    s_inter = _above(results, _SKEWED, _NONE, "inter_user_diversity")
    s_intra = _above(results, _SKEWED, _NONE, "intra_user_diversity")
    ok = all([b_intra_none, b_intra_hyb, b_inter, b_fb, s_inter, s_intra])
    return CriterionResult(
        5, "added-algorithm-directions", ok,
        f"binned: intra>none={b_intra_none}, intra>hybrid={b_intra_hyb}, "
        f"inter<none={b_inter}, fb<none={b_fb}; "
        f"skewed: inter>none={s_inter}, intra>none={s_intra}")


def criterion_6(results: RunResults, pair_sample_size: int = 0) -> CriterionResult:
    """Filter-bubble ranking agrees with the pairwise-distance curve ranking."""
    summary = comparison_summary(results, pair_sample_size=pair_sample_size)
    tau = summary["kendall_tau"]
    ok = tau is not None and tau >= KENDALL_MIN
    return CriterionResult(6, "ranking-consistency", ok,
                           f"kendall tau {tau if tau is None else format(tau, '.4f')} "
                           f"(need >= {KENDALL_MIN}), "
                           f"exact match={summary['exact_ranking_match']}")


def criterion_7(results: RunResults) -> CriterionResult:
    """Diversity price: the binned algorithm keeps consumed quality at the
    hybrid level while the skewed one pays a quality cost."""
    b_ok = _overlaps(results, _BINNED, _HYBRID, "mean_quality_component")
    s_ok = _below(results, _SKEWED, _HYBRID, "mean_quality_component")
    bs = _stat(results, _BINNED, "mean_quality_component")
    ss = _stat(results, _SKEWED, "mean_quality_component")
    hs = _stat(results, _HYBRID, "mean_quality_component")
    return CriterionResult(7, "quality-tradeoff", b_ok and s_ok,
                           f"binned {bs.mean:.3f} overlaps hybrid {hs.mean:.3f}: {b_ok}; "
                           f"skewed {ss.mean:.3f} below hybrid: {s_ok}")


def criterion_8(results: RunResults, rerun_algorithms: tuple[str, ...] = ("none", "svd")
                ) -> CriterionResult:
    """Re-simulating a run reproduces its log and metrics bit for bit.

    The supporting numeric oracles (least-squares recovery, similarity
    against a dense decomposition, pairwise distance against brute force,
    standardization and tie-break unit checks) live in the test suite.
    """
    mismatches = []
    for name in rerun_algorithms:
        kind = AlgorithmKind.from_cli_name(name)
        runs = results.runs_of(kind)
        if not runs:
            mismatches.append(f"{name}: no runs")
            continue
        rid = runs[0]
        log, report, _ = run_single(results.config, kind, rid)
        old = results.logs[(name, rid)]
        same = (np.array_equal(log.choices, old.choices)
                and np.array_equal(log.item_genre, old.item_genre)
                and np.array_equal(log.item_quality, old.item_quality)
                and np.array_equal(log.preferences, old.preferences))
        key = (name, rid)
        same_text = (metrics_csv_text({key: report})
                     == metrics_csv_text({key: results.reports[key]}))
        if not (same and same_text):
            mismatches.append(f"{name}: log-equal={same}, metrics-equal={same_text}")
    ok = not mismatches
    detail = ("bit-identical rerun for " + ", ".join(rerun_algorithms)
              if ok else "; ".join(mismatches))
    return CriterionResult(8, "deterministic-replay", ok, detail)


def evaluate_all(results: RunResults, pair_sample_size: int = 0,
                 rerun_check: bool = True) -> list[CriterionResult]:
    out = [
        criterion_1(results),
        criterion_2(results),
        criterion_3(results),
        criterion_4(results),
        criterion_5(results),
        criterion_6(results, pair_sample_size=pair_sample_size),
        criterion_7(results),
    ]
    if rerun_check:
        out.append(criterion_8(results))
    return out
