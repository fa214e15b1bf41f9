"""Wrappers around resolve_training for building the fully resolved experiment."""

from __future__ import annotations

import hashlib
import json
from typing import Dict

from src.schema import ExperimentConfig, TrainingConfig, resolve_training


def resolve_training_to_dict(training: TrainingConfig) -> Dict:
    """Resolve a TrainingConfig into a plain dict (enums as values)."""
    return resolve_training(training).model_dump(mode="json")


def resolve_experiment(cfg: ExperimentConfig) -> Dict:
    """The whole config with the [training] section replaced by its resolved form."""
    raw = cfg.model_dump(mode="json")
    raw["training"] = resolve_training_to_dict(cfg.training)
    raw["device"]["rate_a"] = cfg.device.rate
    return raw


def config_digest(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of the resolved experiment."""
    payload = json.dumps(resolve_experiment(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
