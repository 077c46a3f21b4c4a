"""Deterministic random streams for reproducible, schedule-independent runs.

Every random draw in the library comes from a counter-based generator
(Philox) keyed by (master seed, pair index, purpose).  Two runs with the
same master seed produce identical draws no matter how work is distributed
across workers, because no generator state is ever shared or advanced
across pairs.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK48 = (1 << 48) - 1

# Fixed purpose ids; appending new purposes is fine, renumbering is not,
# since the ids are part of the reproducibility contract.
PURPOSES = {
    "l1": 0,
    "l2": 1,
    "selection": 2,
    "lambda": 3,
    "pairing": 4,
    "odd_partner": 5,
}


def derived_generator(master_seed: int, pair_index: int, purpose: str) -> np.random.Generator:
    """Return a fresh generator for one (seed, pair, purpose) combination."""
    if purpose not in PURPOSES:
        raise KeyError(f"unknown rng purpose: {purpose!r}")
    key = np.array(
        [master_seed & _MASK64, ((pair_index & _MASK48) << 16) | PURPOSES[purpose]],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


class PairStreams:
    """Per-pair bundle of named random streams.

    Each call to :meth:`stream` returns a brand-new generator, so the order
    in which purposes are consumed cannot affect any other purpose's draws.
    """

    def __init__(self, master_seed: int, pair_index: int = 0):
        self.master_seed = int(master_seed)
        self.pair_index = int(pair_index)

    def stream(self, purpose: str) -> np.random.Generator:
        return derived_generator(self.master_seed, self.pair_index, purpose)

    def state_tag(self, purpose: str) -> tuple[int, int, str]:
        """Identifying tuple of a stream, recorded in diagnostics/manifests."""
        return (self.master_seed, self.pair_index, purpose)

    def __repr__(self) -> str:
        return f"PairStreams(master_seed={self.master_seed}, pair_index={self.pair_index})"
