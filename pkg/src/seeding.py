"""Seed derivation: every random stream is keyed by (master seed, agent seed, purpose)."""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    pools = 1
    weights = 2
    trials = 3
    test = 4
    device = 5
    hardware_rng = 6
    replay = 7
    population = 8
    learners = 9


def make_rng(*keys: int) -> np.random.Generator:
    """Independent generator for an arbitrary tuple of non-negative integer keys."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def derive_seed(*keys: int) -> int:
    """A 32-bit integer seed derived from keys (stable across numpy versions)."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])
