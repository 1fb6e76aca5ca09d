"""The nine recommendation signal generators.

Four idealized baselines (none, true-genre, true-quality, perfect), three
past-consumption algorithms (consumption, svd, hybrid), and two designed to
steer both diversity axes (binned-consumption, skewed-top-pick).  Every
generator is a pure function of a round-start snapshot and returns one
signal plane per component, covering all (user, existing item) pairs.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import UsageError
from .signals import RecSignalMatrix
from .world import WorldState

#: Within-bin count spreads below this make the binned signal zero.
BIN_STD_FLOOR = 1e-12


class AlgorithmKind(Enum):
    """Recommendation algorithm, identified by its CLI name."""

    NONE = "none"
    TRUE_GENRE = "true-genre"
    TRUE_QUALITY = "true-quality"
    PERFECT = "perfect"
    CONSUMPTION = "consumption"
    SVD = "svd"
    HYBRID = "hybrid"
    BINNED_CONSUMPTION = "binned-consumption"
    SKEWED_TOP_PICK = "skewed-top-pick"

    @property
    def cli_name(self) -> str:
        return self.value

    @property
    def signal_dim(self) -> int:
        return len(_REC_COLUMNS[self])

    @property
    def rec_columns(self) -> list[str]:
        return list(_REC_COLUMNS[self])

    @property
    def reveals_genre(self) -> bool:
        """Whether the signal displays items' true genres.

        A displayed quality can be read straight off its signal column
        (utility is linear in quality), but a displayed genre only matters
        through each user's personal distance to it, which no shared column
        can encode.  Revealing kinds therefore make the distance feature
        exact instead.
        """
        return self in (AlgorithmKind.TRUE_GENRE, AlgorithmKind.PERFECT)

    @classmethod
    def from_cli_name(cls, name: str) -> "AlgorithmKind":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise UsageError(f"unknown algorithm {name!r}; expected one of: {valid}") from None


_REC_COLUMNS = {
    AlgorithmKind.NONE: (),
    AlgorithmKind.TRUE_GENRE: ("rec_genre",),
    AlgorithmKind.TRUE_QUALITY: ("rec_quality",),
    AlgorithmKind.PERFECT: ("rec_quality", "rec_genre"),
    AlgorithmKind.CONSUMPTION: ("rec_consumption",),
    AlgorithmKind.SVD: ("rec_svd",),
    AlgorithmKind.HYBRID: ("rec_consumption", "rec_svd"),
    AlgorithmKind.BINNED_CONSUMPTION: ("rec_binned",),
    AlgorithmKind.SKEWED_TOP_PICK: ("rec_top_pick",),
}

#: The seven algorithms of the core comparison, in presentation order.
ORIGINAL_SEVEN = (
    AlgorithmKind.NONE, AlgorithmKind.TRUE_GENRE, AlgorithmKind.TRUE_QUALITY,
    AlgorithmKind.PERFECT, AlgorithmKind.CONSUMPTION, AlgorithmKind.SVD,
    AlgorithmKind.HYBRID,
)
NOVEL_TWO = (AlgorithmKind.BINNED_CONSUMPTION, AlgorithmKind.SKEWED_TOP_PICK)
ALL_KINDS = ORIGINAL_SEVEN + NOVEL_TWO


def recommend(state: WorldState, kind: AlgorithmKind,
              round_no: int | None = None) -> RecSignalMatrix:
    """Signal planes for every (user, existing item) pair of this round."""
    if not isinstance(kind, AlgorithmKind):
        raise UsageError(f"unknown algorithm kind: {kind!r}")
    m, n = state.config.m, state.n_items

    def bcast(per_item: np.ndarray) -> np.ndarray:
        return np.broadcast_to(per_item[None, :], (m, n))

    if kind is AlgorithmKind.NONE:
        planes: list[np.ndarray] = []
    elif kind is AlgorithmKind.TRUE_GENRE:
        planes = [bcast(state.item_g[:n])]
    elif kind is AlgorithmKind.TRUE_QUALITY:
        planes = [bcast(state.item_q[:n])]
    elif kind is AlgorithmKind.PERFECT:
        planes = [bcast(state.item_q[:n]), bcast(state.item_g[:n])]
    elif kind is AlgorithmKind.CONSUMPTION:
        planes = [bcast(consumption_signal(state.ledger.counts[:n]))]
    elif kind is AlgorithmKind.SVD:
        planes = [svd_signal(state, _cached_similarity(state))]
    elif kind is AlgorithmKind.HYBRID:
        planes = list(hybrid_signal(state, _cached_similarity(state)).planes)
    elif kind is AlgorithmKind.BINNED_CONSUMPTION:
        planes = [bcast(binned_consumption_signal(state, state.config.genre_bin_width))]
    elif kind is AlgorithmKind.SKEWED_TOP_PICK:
        planes = [skewed_top_pick_signal(state, state.config.delta_skew,
                                         state.config.k_top_pct)]
    else:  # pragma: no cover - enum is exhaustive
        raise UsageError(f"unknown algorithm kind: {kind!r}")
    return RecSignalMatrix(planes=planes, names=kind.rec_columns,
                           reveals_genre=kind.reveals_genre)


def consumption_signal(counts: np.ndarray) -> np.ndarray:
    """Raw popularity: every user sees the same per-item consumption total."""
    return counts.astype(float)


def _cached_similarity(state: WorldState) -> np.ndarray:
    """The round's user-similarity matrix (consumption does not change
    between the two signal constructions of a round, so this caches)."""
    sim = state._round_cache.get("svd_sim")
    if sim is None:
        flags = state.ledger.consumed[:, :state.n_items]
        sim = svd_user_similarity(flags, state.config.svd_rank)
        state._round_cache["svd_sim"] = sim
    return sim


def svd_user_similarity(consumption: np.ndarray, rank: int) -> np.ndarray:
    """Cosine similarity between truncated-SVD user representations.

    The 0/1 consumption matrix D (users x items) is decomposed at rank
    min(rank, numerical rank); a user's representation is their row of
    U * Sigma.  Cosines are computed from the rank-r Gram reconstruction
    sum_k lambda_k v_k v_k', which equals U_r S_r (U_r S_r)' exactly, so the
    result does not depend on singular-vector sign conventions.  Users whose
    representation is (numerically) zero get similarity 0 to everyone,
    themselves included.
    """
    if rank < 1:
        raise UsageError(f"rank must be >= 1, got {rank}")
    D = np.asarray(consumption, dtype=float)
    m, n = D.shape
    gram = D @ D.T
    r = min(rank, m)
    eps = np.finfo(float).eps
    if m <= 64 or r >= m - 1:
        vals, vecs = scipy.linalg.eigh(gram)
        vals, vecs = vals[-r:], vecs[:, -r:]
    else:
        vals, vecs = scipy.linalg.eigh(gram, subset_by_index=(m - r, m - 1))
    lam_max = float(vals[-1]) if vals.size else 0.0
    if lam_max <= 0.0:
        return np.zeros((m, m))
    # lambda = sigma^2, so the matrix_rank convention sigma > sigma_max*max(m,n)*eps
    # becomes lambda > lambda_max*(max(m,n)*eps)^2.
    keep = vals > lam_max * (max(m, n) * eps) ** 2
    vals, vecs = vals[keep], vecs[:, keep]
    reconstructed = (vecs * vals) @ vecs.T
    norms_sq = np.clip(np.diag(reconstructed).copy(), 0.0, None)
    nonzero = norms_sq > lam_max * m * eps
    inv_norm = np.zeros(m)
    inv_norm[nonzero] = 1.0 / np.sqrt(norms_sq[nonzero])
    sim = reconstructed * inv_norm[:, None] * inv_norm[None, :]
    sim[~nonzero, :] = 0.0
    sim[:, ~nonzero] = 0.0
    return np.clip(sim, -1.0, 1.0)


def svd_signal(state: WorldState, similarity: np.ndarray) -> np.ndarray:
    """Similarity-weighted consumption counts: row j is sum_j' Sim(j,j') d^j'."""
    flags = state.ledger.consumed[:, :state.n_items].astype(float)
    return similarity @ flags


def hybrid_signal(state: WorldState, similarity: np.ndarray) -> RecSignalMatrix:
    """Consumption signal and SVD signal side by side (consumption first)."""
    m, n = state.config.m, state.n_items
    counts_plane = np.broadcast_to(
        consumption_signal(state.ledger.counts[:n])[None, :], (m, n))
    return RecSignalMatrix(
        planes=[counts_plane, svd_signal(state, similarity)],
        names=AlgorithmKind.HYBRID.rec_columns)


def binned_consumption_signal(state: WorldState, genre_bin_width: float) -> np.ndarray:
    """Consumption counts z-scored within genre bins.

    Genres are discretized into [k*w, (k+1)*w) bins; each item's count is
    centered and scaled by its bin's population mean/std.  Bins with a single
    item (or no count spread) contribute zero signal.
    """
    if genre_bin_width <= 0:
        raise UsageError(f"bin width must be > 0, got {genre_bin_width}")
    n = state.n_items
    d = state.ledger.counts[:n].astype(float)
    bins = np.floor(state.item_g[:n] / genre_bin_width).astype(np.int64)
    _, inverse, sizes = np.unique(bins, return_inverse=True, return_counts=True)
    sums = np.bincount(inverse, weights=d)
    mean = sums / sizes
    sq_sums = np.bincount(inverse, weights=d * d)
    var = np.clip(sq_sums / sizes - mean**2, 0.0, None)
    std = np.sqrt(var)
    signal = np.zeros(n)
    ok = (sizes[inverse] > 1) & (std[inverse] >= BIN_STD_FLOOR)
    signal[ok] = (d[ok] - mean[inverse[ok]]) / std[inverse[ok]]
    return signal


def top_pick_count(k_top_pct: float, n_items: int) -> int:
    """Number of recommended items: ceil(k_top_pct% of the current pool)."""
    return min(n_items, math.ceil(k_top_pct * n_items / 100.0))


def skewed_top_pick_signal(state: WorldState, delta_skew: float,
                           k_top_pct: float) -> np.ndarray:
    """Indicator of membership in each user's skewed top picks.

    Every existing item (consumed or not) is scored q_sig * |g_sig|^delta
    from the user's own signals and ranked per user in descending order,
    ties to the lowest item id; the top ceil(k_top_pct% * n) items get
    signal 1.  Scoring the perceived genre rather than the true one is what
    lets the fitted model reward the flag: the perceived-distance feature
    already accounts for |g_sig|, so the flag carries no hidden true-distance
    penalty, and users get nudged toward extreme-genre items instead of
    learning to avoid them.  With delta = 0 the genre factor is identically 1
    (0^0 := 1), reducing to a private-quality ranking.
    """
    if not 0 < k_top_pct <= 100:
        raise UsageError(f"k_top_pct must be in (0, 100], got {k_top_pct}")
    m, n = state.config.m, state.n_items
    scores = (state.signals.q_sig[:, :n]
              * np.abs(state.signals.g_sig[:, :n]) ** delta_skew)
    c = top_pick_count(k_top_pct, n)
    # Stable sort on -score keeps equal-score items in id order.
    order = np.argsort(-scores, axis=1, kind="stable")
    signal = np.zeros((m, n))
    np.put_along_axis(signal, order[:, :c], 1.0, axis=1)
    return signal
