"""Initial-state pools for pre-training, re-training and testing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError
from src.pendulum.dynamics import PendulumState
from src.schema import PoolConfig
from src.seeding import Stream, make_rng


@dataclass(frozen=True)
class StatePools:
    pretrain: Tuple[PendulumState, ...]
    retrain: Tuple[PendulumState, ...]
    test: Tuple[PendulumState, ...]


def generate_pool(rng: np.random.Generator, size: int, config: PoolConfig) -> Tuple[PendulumState, ...]:
    """States at rest on the arm with a small tilt, all inside the upright region."""
    alpha_max = math.radians(config.initial_alpha_max_deg)
    alphas = rng.uniform(-alpha_max, alpha_max, size=size)
    alpha_dots = rng.uniform(-config.initial_alpha_dot_max, config.initial_alpha_dot_max, size=size)
    return tuple(
        PendulumState(0.0, 0.0, float(a), float(ad)) for a, ad in zip(alphas, alpha_dots)
    )


def build_pools(config: PoolConfig, master_seed: int) -> StatePools:
    """Pools of 7000 / 2000 / 500 states (by default), fixed per master seed."""
    return StatePools(
        pretrain=generate_pool(make_rng(master_seed, Stream.pools, 0), config.pretrain_size, config),
        retrain=generate_pool(make_rng(master_seed, Stream.pools, 1), config.retrain_size, config),
        test=generate_pool(make_rng(master_seed, Stream.pools, 2), config.test_size, config),
    )


def sample_initial_state(rng: np.random.Generator, pool: Sequence[PendulumState]) -> PendulumState:
    if len(pool) == 0:
        raise ConfigurationError("cannot sample from an empty state pool")
    return pool[int(rng.integers(len(pool)))]


def test_subsample(pool: Sequence[PendulumState], n: int | None) -> Tuple[PendulumState, ...]:
    """First n states of the pool; None keeps all of them."""
    if n is None:
        return tuple(pool)
    if n < 1 or n > len(pool):
        raise ConfigurationError(f"test subsample {n} outside 1..{len(pool)}")
    return tuple(pool[:n])


# pytest would otherwise collect this helper when imported into a test module
test_subsample.__test__ = False
