"""Seed derivation utilities.

All randomness in the package flows from user-facing integer seeds through
numpy ``SeedSequence`` objects.  Subsystems that share one seed are kept on
disjoint streams via spawn keys, so parallel execution and sequential
execution consume independent, reproducible streams.
"""

from __future__ import annotations

import numpy as np

# Stream tags (spawn-key prefixes) for the package's independent consumers.
STREAM_SPLIT = 1
STREAM_FIT = 2
STREAM_ADJACENCY = 3
STREAM_MODEL = 4
STREAM_KMEANS_SBM = 5
STREAM_KMEANS_DCBM = 6
STREAM_LINKPRED = 7
STREAM_REP = 8


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    entropy = int(seed) % (1 << 64)
    spawn_key = tuple(int(k) % (1 << 32) for k in key)
    return np.random.SeedSequence(entropy=entropy, spawn_key=spawn_key)


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` on the stream identified by ``key``."""
    return np.random.default_rng(seed_sequence(seed, *key))


def child_seed(seed: int, *key: int) -> int:
    """Derive an integer seed for a subsystem; stable across platforms."""
    return int(seed_sequence(seed, *key).generate_state(1, np.uint64)[0])
