"""Rotary inverted pendulum environment."""

from src.pendulum.dynamics import (
    Action,
    PendulumEnv,
    PendulumState,
    derivatives,
    mechanical_energy,
    normalize_state,
    reward,
    rk4_step,
    step,
    with_variation,
    wrap_angle,
)
from src.pendulum.pools import StatePools, build_pools, generate_pool, sample_initial_state, test_subsample

__all__ = [
    "Action",
    "PendulumEnv",
    "PendulumState",
    "StatePools",
    "build_pools",
    "derivatives",
    "generate_pool",
    "mechanical_energy",
    "normalize_state",
    "reward",
    "rk4_step",
    "sample_initial_state",
    "step",
    "test_subsample",
    "with_variation",
    "wrap_angle",
]
