"""Diversity, filter-bubble, homogeneity, and utility metrics over a log.

All variances are population variances.  That choice makes the law of total
variance exact: with every user consuming the same number of items, the
pooled consumed-genre variance equals inter-user diversity plus intra-user
diversity to rounding error, which is this module's master self-check.

Metrics with zero denominators are reported as NaN (an explicit
undefined-metric marker), never silently dropped and never an exception.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import ConsumptionLog
from .errors import DataError


@dataclass
class UserSummary:
    user_id: int
    preference: float
    mean_genre: float      # mean consumed genre
    genre_variance: float  # population variance of consumed genres
    deviation: float       # mean_genre - preference


@dataclass
class MetricsReport:
    algorithm: str
    run_id: int
    inter_user_diversity: float
    intra_user_diversity: float
    filter_bubble: float
    homogeneity: float
    alt_homogeneity: float
    natural_homogeneity: float
    mean_quality_component: float
    mean_affinity_component: float
    std_quality_component: float
    std_affinity_component: float


def _consumed_genres(log: ConsumptionLog) -> np.ndarray:
    """(T, m) matrix of consumed genres; validates the log on the way."""
    if log.choices.size == 0:
        raise DataError("empty consumption log")
    if log.choices.min() < 0 or log.choices.max() >= len(log.item_genre):
        raise DataError("log references items missing from its item table")
    return log.item_genre[log.choices]


def summary_arrays(log: ConsumptionLog) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(means, variances, preferences) arrays, one entry per user."""
    genres = _consumed_genres(log)
    return genres.mean(axis=0), genres.var(axis=0), log.preferences


def user_summaries(log: ConsumptionLog) -> list[UserSummary]:
    mu, var, prefs = summary_arrays(log)
    return [UserSummary(user_id=j, preference=float(prefs[j]),
                        mean_genre=float(mu[j]), genre_variance=float(var[j]),
                        deviation=float(mu[j] - prefs[j]))
            for j in range(len(mu))]


def inter_user_diversity(summaries: list[UserSummary]) -> float:
    """Population variance of the users' mean consumed genres."""
    if not summaries:
        raise DataError("no user summaries")
    return float(np.var([s.mean_genre for s in summaries]))


def intra_user_diversity(summaries: list[UserSummary]) -> float:
    """Mean of the users' consumed-genre variances."""
    if not summaries:
        raise DataError("no user summaries")
    return float(np.mean([s.genre_variance for s in summaries]))


def filter_bubble_effect(inter: float, intra: float) -> float:
    """Inter-user over intra-user diversity; NaN when intra is zero."""
    if intra == 0.0:
        return float("nan")
    return inter / intra


def homogeneity(inter: float, intra: float) -> float:
    """1 / sqrt(inter^2 + intra^2); NaN when both diversities are zero."""
    denom = np.hypot(inter, intra)
    if denom == 0.0:
        return float("nan")
    return float(1.0 / denom)


def alt_homogeneity(inter: float, intra: float) -> float:
    """1 / (inter + intra); NaN when the sum is zero."""
    total = inter + intra
    if total == 0.0:
        return float("nan")
    return 1.0 / total


def pooled_genre_variance(log: ConsumptionLog) -> float:
    """Population variance of all consumed genres pooled with multiplicity."""
    return float(_consumed_genres(log).var())


def natural_homogeneity(log: ConsumptionLog) -> float:
    """Inverse standard deviation of the pooled consumed genres."""
    var = pooled_genre_variance(log)
    if var == 0.0:
        return float("nan")
    return float(1.0 / np.sqrt(var))


def pairwise_genre_distance(log: ConsumptionLog, user_a: int, user_b: int) -> float:
    """Total |genre difference| over all cross pairs of two users' items.

    Computed with a sort and prefix sums in O(T log T) rather than the
    quadratic double loop.
    """
    genres = _consumed_genres(log)
    return sorted_prefix_distance(np.sort(genres[:, user_a]),
                                  np.sort(genres[:, user_b]))


def sorted_prefix_distance(sorted_a: np.ndarray, b: np.ndarray) -> float:
    """sum_{a,b} |a - b| given one side pre-sorted (prefix-sum identity)."""
    na = len(sorted_a)
    prefix = np.concatenate(([0.0], np.cumsum(sorted_a)))
    pos = np.searchsorted(sorted_a, b)
    return float(np.sum(b * (2 * pos - na) + prefix[na] - 2 * prefix[pos]))


def utility_components(log: ConsumptionLog) -> tuple[float, float, float, float]:
    """(mean_q, mean_aff, std_q, std_aff) over all consumption events.

    Quality component of an event is the item's quality; affinity component
    is minus the true preference/genre distance, so the two sum to the
    realized utility.
    """
    q = log.item_quality[log.choices]
    aff = -np.abs(log.preferences[None, :] - log.item_genre[log.choices])
    return float(q.mean()), float(aff.mean()), float(q.std()), float(aff.std())


def compute_report(log: ConsumptionLog) -> MetricsReport:
    """All per-run metrics in one pass over the log."""
    mu, var, _ = summary_arrays(log)
    inter = float(np.var(mu))
    intra = float(np.mean(var))
    mean_q, mean_aff, std_q, std_aff = utility_components(log)
    return MetricsReport(
        algorithm=log.algorithm.cli_name,
        run_id=log.run_id,
        inter_user_diversity=inter,
        intra_user_diversity=intra,
        filter_bubble=filter_bubble_effect(inter, intra),
        homogeneity=homogeneity(inter, intra),
        alt_homogeneity=alt_homogeneity(inter, intra),
        natural_homogeneity=natural_homogeneity(log),
        mean_quality_component=mean_q,
        mean_affinity_component=mean_aff,
        std_quality_component=std_q,
        std_affinity_component=std_aff,
    )
