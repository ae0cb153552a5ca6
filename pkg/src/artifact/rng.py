"""Counter-based random streams keyed by (seed, index path).

Every Monte Carlo sample draws from its own Philox stream, so results do not
depend on evaluation order or on how samples are split across workers.
"""

import numpy as np

FRAME_STREAM = 0
WORD_STREAM = 1
POINT_STREAM = 2


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(p) for p in path]])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed, reproducible from (seed, path)."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(p) for p in path]])
    return int(ss.generate_state(1, np.uint64)[0])
