"""Seeded substreams keyed by (seed, purpose, indices...).

Every stochastic draw in a run comes from a generator built from a fixed key,
so any round of an experiment can be replayed in isolation.
"""

import numpy as np

OBJECTIVE = 1
NOISE = 2
PERMUTATION = 3
SPHERE = 4
INSTANCE = 5
MISC = 9


def substream(seed, purpose, *index):
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(purpose), *(int(i) for i in index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))
