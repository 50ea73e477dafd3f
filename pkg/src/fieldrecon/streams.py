"""Deterministic RNG substream derivation.

Every stochastic component (spatial increments, temporal increments,
measurement noise, field draws) owns a generator keyed by
(master_seed, n, trial, stream-tag), so results never depend on execution
order or on how trials are distributed over workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAM_TAGS = ("spatial", "temporal", "noise", "field")


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream identified by ``key`` under ``master_seed``."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class TrialStreams:
    """Independent generators for one (n, trial) cell of a sweep."""

    spatial: np.random.Generator
    temporal: np.random.Generator
    noise: np.random.Generator
    field: np.random.Generator


def trial_streams(master_seed: int, n: int, trial: int) -> TrialStreams:
    gens = {tag: substream(master_seed, n, trial, i) for i, tag in enumerate(STREAM_TAGS)}
    return TrialStreams(**gens)
