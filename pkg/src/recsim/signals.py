"""Feature assembly: private signals plus recommendation components.

The estimator sees, for each (user, available item) pair, the fixed column
layout ``[q_sig, distance, rec...]`` where ``distance`` is the distance
between the user's preference and their best genre estimate: the private
noisy estimate normally, or the displayed genre itself when the
recommendation reveals it (a shared genre column is useless to a pooled
linear model, since genre only matters through each user's own distance).
Keeping the order fixed is what makes learned weights portable from the
training phase to deployment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalError
from .world import PrivateSignals, User, WorldState

BASE_COLUMNS = ("q_sig", "distance")


@dataclass
class RecSignalMatrix:
    """Recommendation components for one round.

    ``planes`` holds one (m, n_items) array per component; non-personalized
    recommenders store broadcast views, so this is cheap either way.
    ``reveals_genre`` marks signals that display items' true genres, which
    makes the distance feature exact for every user.
    """

    planes: list[np.ndarray]
    names: list[str]
    reveals_genre: bool = False

    @property
    def dim(self) -> int:
        return len(self.planes)


@dataclass
class FeatureMatrix:
    """Row-per-(user, item) feature table with a fixed column layout."""

    values: np.ndarray     # (rows, columns) float
    user_idx: np.ndarray   # (rows,) int, user of each row
    item_idx: np.ndarray   # (rows,) int, local item index of each row
    columns: list[str]

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


def perceived_distance(user: User, item_id: int, signals: PrivateSignals,
                       id_offset: int = 0) -> float:
    """|preference - private genre estimate| for one pair."""
    g = signals.g_sig[user.id, item_id - id_offset]
    return abs(user.preference - g)


def feature_planes(state: WorldState, rec: RecSignalMatrix
                   ) -> tuple[list[np.ndarray], list[str]]:
    """Dense (m, n_items) planes in the canonical column order."""
    n = state.n_items
    m = state.config.m
    for p in rec.planes:
        if p.shape != (m, n):
            raise InternalError(
                f"recommendation signal shape {p.shape} does not cover ({m}, {n})")
    q_sig = state.signals.q_sig[:, :n]
    if rec.reveals_genre:
        dist = np.abs(state.prefs[:, None] - state.item_g[None, :n])
    else:
        dist = np.abs(state.prefs[:, None] - state.signals.g_sig[:, :n])
    return [q_sig, dist, *rec.planes], list(BASE_COLUMNS) + list(rec.names)


def build_features(state: WorldState, rec: RecSignalMatrix,
                   mask: np.ndarray | None = None) -> FeatureMatrix:
    """One row per (user, available item), in user-major order.

    ``mask`` restricts the domain; it defaults to the current availability.
    """
    planes, names = feature_planes(state, rec)
    if mask is None:
        mask = state.available_mask()
    if mask.shape != planes[0].shape:
        raise InternalError(
            f"mask shape {mask.shape} does not match features {planes[0].shape}")
    users, items = np.nonzero(mask)
    values = np.empty((users.size, len(planes)))
    for c, plane in enumerate(planes):
        values[:, c] = plane[users, items]
    return FeatureMatrix(values=values, user_idx=users, item_idx=items,
                         columns=names)
