from __future__ import annotations

import pytest

from src.schema import ExperimentConfig, PendulumConfig


def tiny_config(**harness) -> ExperimentConfig:
    """A configuration small enough for a full sweep in a unit test."""
    raw = {
        "pendulum": {"max_steps": 30},
        "pools": {"pretrain_size": 10, "retrain_size": 10, "test_size": 5, "test_subsample": 3},
        "training": {"max_trials": 5},
        "pretrain": {"max_trials": 5},
        "offpolicy": {"buffer_size": 50, "samples": 50},
        "synchronous": {"learners": 2, "total_samples": 40, "checkpoint_every": 20},
        "harness": {
            "scale": "desk",
            "seed": 3,
            "desk_variations": 1,
            "desk_seeds": 1,
            "c_values": [1, 2],
            "device_c_values": [1, 2],
            "scaling_learners": [1, 2],
            "curve_bin": 2,
            **harness,
        },
    }
    return ExperimentConfig.model_validate(raw)


@pytest.fixture
def tiny_cfg() -> ExperimentConfig:
    return tiny_config()


@pytest.fixture
def frictionless() -> PendulumConfig:
    return PendulumConfig(arm_viscous_damping=0.0, pendulum_viscous_damping=0.0)


@pytest.fixture
def make_tiny_cfg():
    return tiny_config
