"""Reproducible random-stream plumbing.

Every random draw in a simulation comes from a Philox (counter-based)
generator keyed by ``(master_seed, context indices..., role)``.  Streams for
different trials or roles are statistically independent and can be created
in any order, which keeps multi-worker runs bit-identical to serial ones.
"""

from __future__ import annotations

import numpy as np

# Role tags for the independent sub-streams of one trial.
ROLE_DATA = 0        # source symbols and sensor noise
ROLE_SCATTER = 1     # scattering angles / phases / gains
ROLE_INIT = 2        # initial steering guess inside the sector


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator identified by ``(master_seed, *key)``."""
    seq = np.random.SeedSequence([int(master_seed), *(int(k) for k in key)])
    return np.random.Generator(np.random.Philox(seq))
