"""Column standardization and the shared least-squares utility estimator.

All users share one linear model: estimated utility = w0 + w . z where z is
the z-scored feature row.  Standardization statistics are always population
statistics, computed fresh on whatever matrix is being standardized, and are
carried alongside the coefficients so raw rows can be scored later.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import FitError, InternalError, UsageError
from .signals import FeatureMatrix

#: Columns with population std below this are treated as constant: they are
#: centered but not scaled, and flagged so fits can ignore them.
DEGENERATE_STD = 1e-9

#: Ridge strength applied to coefficients (never the intercept) when the
#: normal equations are singular.
RIDGE_FALLBACK = 1e-8


@dataclass
class ColumnStats:
    mean: np.ndarray        # (columns,)
    std: np.ndarray         # (columns,) population std
    degenerate: np.ndarray  # (columns,) bool, std < DEGENERATE_STD

    @classmethod
    def identity(cls, n_columns: int) -> "ColumnStats":
        return cls(mean=np.zeros(n_columns), std=np.ones(n_columns),
                   degenerate=np.zeros(n_columns, dtype=bool))


@dataclass
class Weights:
    """Fitted affine model plus the stats needed to apply it to raw rows."""

    w0: float
    w: np.ndarray            # aligned to standardized feature columns
    stats: ColumnStats
    columns: list[str] | None = None


def column_stats(values: np.ndarray) -> ColumnStats:
    """Population mean/std per column of an (N, C) array."""
    if values.ndim != 2 or values.shape[0] == 0:
        raise UsageError("standardization needs a non-empty 2-D matrix")
    mean = values.mean(axis=0)
    std = values.std(axis=0)  # ddof=0
    return ColumnStats(mean=mean, std=std, degenerate=std < DEGENERATE_STD)


def apply_stats(values: np.ndarray, stats: ColumnStats) -> np.ndarray:
    """Z-score columns with precomputed stats; degenerate columns are only
    centered (a constant column becomes exactly zero)."""
    divisor = np.where(stats.degenerate, 1.0, stats.std)
    return (values - stats.mean) / divisor


def standardize(fm: FeatureMatrix) -> tuple[FeatureMatrix, ColumnStats]:
    """Z-score every column of a feature matrix by its own mean/std."""
    stats = column_stats(fm.values)
    out = FeatureMatrix(values=apply_stats(fm.values, stats),
                        user_idx=fm.user_idx, item_idx=fm.item_idx,
                        columns=fm.columns)
    return out, stats


def fit_least_squares(fm: FeatureMatrix, y: np.ndarray,
                      stats: ColumnStats | None = None) -> Weights:
    """Ordinary least squares of y on the (already standardized) features.

    Solves the normal equations by Cholesky; a singular Gram matrix (e.g.
    duplicated or all-constant columns) falls back to a tiny ridge penalty on
    the coefficients.  ``stats`` should be the standardization used to
    produce ``fm`` and travels with the weights; identity stats are assumed
    when omitted.
    """
    X = fm.values
    y = np.asarray(y, dtype=float)
    n_rows, n_cols = X.shape
    if y.shape != (n_rows,):
        raise InternalError(f"target length {y.shape} != rows {n_rows}")
    if n_rows < n_cols + 1:
        raise FitError(f"need at least {n_cols + 1} rows to fit {n_cols} "
                       f"columns plus intercept, got {n_rows}")

    A = np.empty((n_rows, n_cols + 1))
    A[:, 0] = 1.0
    A[:, 1:] = X
    gram = A.T @ A
    rhs = A.T @ y
    try:
        coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), rhs)
        if not np.all(np.isfinite(coef)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        penalty = np.eye(n_cols + 1) * RIDGE_FALLBACK
        penalty[0, 0] = 0.0  # never shrink the intercept
        coef = np.linalg.solve(gram + penalty, rhs)

    if stats is None:
        stats = ColumnStats.identity(n_cols)
    return Weights(w0=float(coef[0]), w=coef[1:], stats=stats,
                   columns=list(fm.columns))


def predict(weights: Weights, row: np.ndarray) -> float:
    """Score one raw feature row: standardize with the stored stats, then
    apply the affine model."""
    row = np.asarray(row, dtype=float)
    if row.shape != weights.w.shape:
        raise InternalError(
            f"feature row has {row.shape} values, model expects {weights.w.shape}")
    z = apply_stats(row[None, :], weights.stats)[0]
    return float(weights.w0 + z @ weights.w)


def predict_planes(weights: Weights, planes: list[np.ndarray],
                   stats: ColumnStats) -> np.ndarray:
    """Dense predictions over (m, n) feature planes standardized by ``stats``.

    Used on whole-world matrices where ``stats`` was computed from the
    available (user, item) entries only.
    """
    if len(planes) != weights.w.shape[0]:
        raise InternalError(
            f"{len(planes)} feature planes for {weights.w.shape[0]} coefficients")
    out = np.full(planes[0].shape, weights.w0)
    divisor = np.where(stats.degenerate, 1.0, stats.std)
    for c, plane in enumerate(planes):
        out += weights.w[c] * ((plane - stats.mean[c]) / divisor[c])
    return out
