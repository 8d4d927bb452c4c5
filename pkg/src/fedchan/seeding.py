"""Deterministic RNG stream derivation.

Every random draw in the simulator comes from a Generator derived from a
(stream tag, integer keys...) tuple.  Identical keys give identical streams
on any machine and under any call interleaving, which is what makes
datasets, training runs and sweeps reproducible byte for byte.
"""

import numpy as np

# stream tags; keep stable, they are part of the reproducibility contract
PATHS = 1
IRS_LINKS = 2
PILOT_NOISE = 3
DATASET = 4
SPLIT = 5
WEIGHT_INIT = 6
DROPOUT = 7
BATCH = 8
UPLINK = 9
DOWNLINK = 10
EVAL = 11
LABEL_NOISE = 12
COVARIANCE = 13


def derive_rng(stream, *keys):
    """Generator seeded from a stream tag plus non-negative integer keys."""
    material = [int(stream)] + [int(k) for k in keys]
    if any(k < 0 for k in material):
        raise ValueError("seed material must be non-negative integers")
    return np.random.default_rng(material)


def as_rng(stream, seed_or_rng, *keys):
    """Pass a Generator through, or derive one from an integer seed."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return derive_rng(stream, seed_or_rng, *keys)
