"""Counter-based random substreams.

Every random draw in the simulator comes from a Philox generator keyed by a
(seed, stream tag, *indices) tuple, so the draw a given entity receives does
not depend on the order in which entities are processed.  Re-running any part
of a simulation therefore reproduces it bit for bit, with or without a
process pool.
"""

from __future__ import annotations

import numpy as np

# Stream tags.  Values are arbitrary but frozen: changing them changes every
# simulated trajectory.
STREAM_USERS = 1      # (seed, tag)                 -> the m user preferences
STREAM_ITEM = 2       # (seed, tag, world, item)    -> one item + its signal noises
STREAM_RUN = 3        # (master_seed, tag, run_idx) -> per-run world seed
STREAM_PAIRS = 4      # (run_seed, tag)             -> user-pair subsampling

_MASK64 = (1 << 64) - 1


def substream(*key: int) -> np.random.Generator:
    """Generator for the substream identified by an integer key tuple."""
    entropy = [int(k) & _MASK64 for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_run_seed(master_seed: int, run_idx: int) -> int:
    """64-bit world seed for run number ``run_idx``.

    Runs are keyed only by (master_seed, run_idx): every algorithm sees the
    same sequence of worlds, which pairs the per-run comparisons.
    """
    ss = np.random.SeedSequence([master_seed & _MASK64, STREAM_RUN, int(run_idx)])
    return int(ss.generate_state(1, np.uint64)[0])
