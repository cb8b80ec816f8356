"""
Seedable random streams.

Every walk draws from a PCG64 generator. A walk seeded with ``s`` uses
``PCG64(SeedSequence(s))``; run ``k`` of an experiment with master seed ``s``
uses ``PCG64(SeedSequence(s, spawn_key=(k,)))``, so results do not depend on
the order in which runs are scheduled.
"""

import numpy as np


def walk_generator(rng_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng_seed)))


def run_generator(master_seed: int, run: int) -> np.random.Generator:
    if run < 0:
        raise ValueError("run must be non-negative")
    seq = np.random.SeedSequence(master_seed, spawn_key=(run,))
    return np.random.Generator(np.random.PCG64(seq))


def entropy_seed() -> int:
    """A fresh 64-bit seed from system entropy."""
    return int(np.random.SeedSequence().entropy) & (2**64 - 1)
