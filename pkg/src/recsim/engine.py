"""Two-phase simulation: learn the shared estimator, then deploy it.

Learning phase: k_train training worlds share the true world's users but
draw their own items.  Each round, features and true-utility targets are
pooled across worlds from the round-start state, a fresh regression is
fitted, and then every training world spawns items and lets each user
consume their argmax-predicted available item.  The round-T weights are the
users' learned estimator.

Deployment phase: the true world runs the same per-round loop with the
frozen weights.  Consumption within a round is simultaneous: every user
chooses against the round-start snapshot, then counts update, so the
outcome does not depend on user evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .errors import FitError, InternalError, UsageError
from .learner import (DEGENERATE_STD, ColumnStats, Weights, apply_stats,
                      column_stats, fit_least_squares, predict_planes)
from .recommenders import AlgorithmKind, recommend
from .rng import STREAM_USERS, substream
from .signals import FeatureMatrix, build_features, feature_planes
from .world import WorldState, init_world, spawn_items, true_utility_matrix


@dataclass
class TrainingWorldSet:
    """The k_train parallel worlds used to learn the estimator."""

    worlds: list[WorldState]
    prefs: np.ndarray  # shared with the true world of the same seed


@dataclass
class ConsumptionLog:
    """Frozen record of one deployment run: choices plus the item/user tables."""

    run_id: int
    algorithm: AlgorithmKind
    choices: np.ndarray          # (T, m) local item indices
    item_quality: np.ndarray     # (n,)
    item_genre: np.ndarray       # (n,)
    item_birth_round: np.ndarray  # (n,) int
    preferences: np.ndarray      # (m,)

    @property
    def n_rounds(self) -> int:
        return self.choices.shape[0]

    @property
    def n_users(self) -> int:
        return self.choices.shape[1]


def shared_preferences(config: ExperimentConfig, seed: int) -> np.ndarray:
    """The m user preferences every world of this seed shares."""
    gen = substream(seed, STREAM_USERS)
    return gen.normal(0.0, np.sqrt(config.var_u), size=config.m)


def init_training_worlds(config: ExperimentConfig, seed: int) -> TrainingWorldSet:
    prefs = shared_preferences(config, seed)
    worlds = [init_world(config, seed, world_id=ell, prefs=prefs)
              for ell in range(1, config.k_train + 1)]
    return TrainingWorldSet(worlds=worlds, prefs=prefs)


def run_training_phase(config: ExperimentConfig, kind: AlgorithmKind, seed: int,
                       weight_history: list[Weights] | None = None) -> Weights:
    """Run the learning phase and return the round-T weights.

    Intermediate per-round weights are appended to ``weight_history`` when a
    list is supplied (they are not otherwise used: deployment sees only the
    final round's fit).
    """
    config.validate()
    training = init_training_worlds(config, seed)
    weights: Weights | None = None
    for t in range(1, config.T + 1):
        # Fit on the round-start state, before this round's items exist.
        parts: list[FeatureMatrix] = []
        targets: list[np.ndarray] = []
        for world in training.worlds:
            rec = recommend(world, kind, t)
            mask = world.available_mask()
            parts.append(build_features(world, rec, mask))
            targets.append(true_utility_matrix(world)[mask])
        X = np.vstack([p.values for p in parts])
        y = np.concatenate(targets)
        stats = column_stats(X)
        pooled = FeatureMatrix(values=apply_stats(X, stats),
                               user_idx=np.concatenate([p.user_idx for p in parts]),
                               item_idx=np.concatenate([p.item_idx for p in parts]),
                               columns=parts[0].columns)
        try:
            weights = fit_least_squares(pooled, y, stats)
        except FitError as exc:
            raise FitError(f"training round {t}: {exc}") from exc
        if weight_history is not None:
            weight_history.append(weights)

        for world in training.worlds:
            spawn_items(world, config.k_new)
            _play_round(world, kind, weights, t)
    assert weights is not None
    return weights


def run_deployment_phase(config: ExperimentConfig, kind: AlgorithmKind,
                         weights: Weights, seed: int, run_id: int = 0) -> ConsumptionLog:
    """Run the true world for T rounds under frozen weights."""
    config.validate()
    if weights.w.shape[0] != 2 + kind.signal_dim:
        raise UsageError(
            f"weights have {weights.w.shape[0]} columns but {kind.cli_name} "
            f"features have {2 + kind.signal_dim}")
    world = init_world(config, seed, world_id=0,
                       prefs=shared_preferences(config, seed))
    for t in range(1, config.T + 1):
        spawn_items(world, config.k_new)
        _play_round(world, kind, weights, t)
    n = world.n_items
    return ConsumptionLog(
        run_id=run_id,
        algorithm=kind,
        choices=np.stack(world.ledger.history),
        item_quality=world.item_q[:n].copy(),
        item_genre=world.item_g[:n].copy(),
        item_birth_round=world.item_birth[:n].copy(),
        preferences=world.prefs.copy(),
    )


def _play_round(world: WorldState, kind: AlgorithmKind, weights: Weights,
                t: int) -> None:
    """One consumption round: rebuild signals, re-standardize, choose, commit."""
    rec = recommend(world, kind, t)
    planes, _ = feature_planes(world, rec)
    mask = world.available_mask()
    if not mask.any(axis=1).all():
        raise InternalError(f"round {t}: a user has no available items")
    stats = _masked_stats(planes, mask)
    predictions = predict_planes(weights, planes, stats)
    predictions[~mask] = -np.inf
    # First max along a row is the lowest item id, the declared tie-break.
    world.commit_choices(np.argmax(predictions, axis=1))


def _masked_stats(planes: list[np.ndarray], mask: np.ndarray) -> ColumnStats:
    """Column stats over the available (user, item) entries only."""
    cols = np.empty((len(planes), 2))
    for c, plane in enumerate(planes):
        vals = plane[mask]
        cols[c, 0] = vals.mean()
        cols[c, 1] = vals.std()
    return ColumnStats(mean=cols[:, 0], std=cols[:, 1],
                       degenerate=cols[:, 1] < DEGENERATE_STD)


def choose_item(predictions: np.ndarray, available: set[int] | list[int]) -> int:
    """Argmax over the available items, ties broken by lowest item id."""
    ids = sorted(available)
    if not ids:
        raise InternalError("choice requested with no available items")
    vals = np.asarray([predictions[i] for i in ids])
    return ids[int(np.argmax(vals))]


def audit_log(log: ConsumptionLog) -> None:
    """Check a log's internal invariants; raises InternalError on violation.

    Verifies the conservation count, that no user repeats an item, and that
    every chosen item existed at its consumption round.
    """
    T, m = log.choices.shape
    if len(log.preferences) != m:
        raise InternalError("preference table does not match choice matrix")
    for j in range(m):
        picks = log.choices[:, j]
        if len(set(picks.tolist())) != T:
            raise InternalError(f"user {j} consumed an item twice")
    rounds = np.arange(1, T + 1)[:, None]
    if (log.item_birth_round[log.choices] > rounds).any():
        raise InternalError("an item was consumed before it existed")
