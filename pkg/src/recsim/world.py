"""World model: users, items, private signals, and consumption bookkeeping.

A world holds m users with fixed genre preferences and a growing pool of
items.  Each item carries a true quality and a true genre; at spawn time
every user also receives fixed private (noisy) estimates of both.  The
ledger records who consumed what and when.

Item ids are assigned in spawn order.  Worlds namespace their ids with
``world_id * capacity`` offsets so ids never collide across the true world
(world 0) and training worlds (1..k_train); world 0 ids are plain 0..n-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .errors import InternalError
from .rng import STREAM_ITEM, STREAM_USERS, substream


@dataclass(frozen=True)
class User:
    id: int
    preference: float


@dataclass(frozen=True)
class Item:
    id: int
    quality: float
    genre: float
    birth_round: int


@dataclass
class PrivateSignals:
    """Per-(user, item) noisy quality/genre estimates, fixed at item spawn."""

    q_sig: np.ndarray  # (m, capacity) float; valid up to n_items columns
    g_sig: np.ndarray  # (m, capacity) float


@dataclass
class Ledger:
    """Consumption record: totals, per-user/item flags, per-round choices."""

    counts: np.ndarray            # (capacity,) int64, d_i
    consumed: np.ndarray          # (m, capacity) bool, d^j_i
    history: list[np.ndarray] = field(default_factory=list)  # one (m,) array per round


class WorldState:
    """Mutable state of one simulated world."""

    def __init__(self, config: ExperimentConfig, seed: int, world_id: int,
                 prefs: np.ndarray):
        self.config = config
        self.seed = int(seed)
        self.world_id = int(world_id)
        self.id_offset = self.world_id * config.n_items
        self.round = 0            # completed rounds
        self.prefs = prefs        # (m,) float, shared across worlds of a run
        cap, m = config.n_items, config.m
        self.n_items = 0
        self.item_q = np.empty(cap)
        self.item_g = np.empty(cap)
        self.item_birth = np.empty(cap, dtype=np.int64)
        self.signals = PrivateSignals(
            q_sig=np.empty((m, cap)), g_sig=np.empty((m, cap)))
        self.ledger = Ledger(
            counts=np.zeros(cap, dtype=np.int64),
            consumed=np.zeros((m, cap), dtype=bool))
        self._round_cache: dict = {}  # per-round memos, cleared on commit

    # -- views ---------------------------------------------------------------

    def user(self, j: int) -> User:
        return User(id=int(j), preference=float(self.prefs[j]))

    def item(self, item_id: int) -> Item:
        i = item_id - self.id_offset
        if not 0 <= i < self.n_items:
            raise InternalError(f"item id {item_id} not in world {self.world_id}")
        return Item(id=int(item_id), quality=float(self.item_q[i]),
                    genre=float(self.item_g[i]), birth_round=int(self.item_birth[i]))

    def available_mask(self) -> np.ndarray:
        """(m, n_items) bool: True where the user has not yet consumed the item."""
        return ~self.ledger.consumed[:, :self.n_items]

    # -- mutation ------------------------------------------------------------

    def commit_choices(self, choices: np.ndarray) -> None:
        """Apply one round of simultaneous consumption (local item indices).

        All users' choices are taken against the same round-start snapshot;
        several users may pick the same item, and its count rises by that
        number.  Completes the round.
        """
        m = self.config.m
        if choices.shape != (m,):
            raise InternalError(f"expected {m} choices, got shape {choices.shape}")
        if self.ledger.consumed[np.arange(m), choices].any():
            raise InternalError("a user chose an item they already consumed")
        self.ledger.consumed[np.arange(m), choices] = True
        np.add.at(self.ledger.counts, choices, 1)
        self.ledger.history.append(choices.astype(np.int64))
        self.round += 1
        self._round_cache.clear()
        total = int(self.ledger.counts[:self.n_items].sum())
        if total != m * self.round:
            raise InternalError(
                f"consumption conservation broken: {total} != {m * self.round}")


def init_world(config: ExperimentConfig, seed: int, world_id: int = 0,
               prefs: np.ndarray | None = None) -> WorldState:
    """Create a world at round 0 with its k_init items.

    ``prefs`` lets training worlds reuse the true world's users; by default
    the m preferences are drawn from Normal(0, var_u) on the user substream
    of ``seed`` (identical for every world of the same seed).
    """
    config.validate()
    if prefs is None:
        gen = substream(seed, STREAM_USERS)
        prefs = gen.normal(0.0, np.sqrt(config.var_u), size=config.m)
    state = WorldState(config, seed, world_id, prefs)
    _spawn(state, config.k_init, birth_round=0)
    return state


def spawn_items(state: WorldState, count: int) -> list[int]:
    """Add ``count`` items to the in-progress round; returns their ids.

    Each item's quality, genre, and per-user signal noises come from a
    substream keyed by (seed, world, item index), so the draws do not depend
    on spawn batching.
    """
    if count < 0:
        raise InternalError(f"cannot spawn {count} items")
    return _spawn(state, count, birth_round=state.round + 1)


def _spawn(state: WorldState, count: int, birth_round: int) -> list[int]:
    cfg = state.config
    if state.n_items + count > cfg.n_items:
        raise InternalError("item capacity exceeded")
    ids = []
    for _ in range(count):
        i = state.n_items
        gen = substream(state.seed, STREAM_ITEM, state.world_id, i)
        state.item_q[i] = gen.normal(cfg.mu_q, np.sqrt(cfg.var_q))
        state.item_g[i] = gen.normal(0.0, np.sqrt(cfg.var_g))
        state.signals.q_sig[:, i] = state.item_q[i] + gen.normal(
            0.0, np.sqrt(cfg.var_ps), size=cfg.m)
        state.signals.g_sig[:, i] = state.item_g[i] + gen.normal(
            0.0, np.sqrt(cfg.var_gs), size=cfg.m)
        state.item_birth[i] = birth_round
        state.n_items += 1
        ids.append(state.id_offset + i)
    return ids


def true_utility(user: User, item: Item) -> float:
    """Utility of consuming the item: quality minus genre misalignment."""
    return item.quality - abs(user.preference - item.genre)


def true_utility_matrix(state: WorldState) -> np.ndarray:
    """(m, n_items) matrix of true utilities for every user/item pair."""
    n = state.n_items
    return state.item_q[:n][None, :] - np.abs(
        state.prefs[:, None] - state.item_g[:n][None, :])


def available_items(state: WorldState, user: User) -> set[int]:
    """Ids of items the user can still consume (availability is per-user)."""
    local = np.nonzero(~state.ledger.consumed[user.id, :state.n_items])[0]
    return set((local + state.id_offset).tolist())
