"""Result records produced by the training loops."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from src.network.weights import SeparateNetWeights, SharedNetWeights


@dataclass(frozen=True)
class TrialRecord:
    steps_survived: int
    updates_applied: int
    success: bool
    gamma: float = 0.0
    diverged: bool = False


@dataclass(frozen=True)
class CheckpointRecord:
    samples: int
    time_steps: int
    updates_per_weight: int
    mean_t2f: float


@dataclass
class Milestone:
    """Weights and cumulative update count when the success count first reached C."""

    criterion: int
    reached: bool
    trials: int
    updates_per_weight: int
    weights: SeparateNetWeights


@dataclass
class TrainingRun:
    trials: List[TrialRecord] = field(default_factory=list)
    milestones: Dict[int, Milestone] = field(default_factory=dict)
    final_gamma: float = 0.0

    @property
    def successes(self) -> int:
        return sum(1 for t in self.trials if t.success)

    @property
    def updates_per_weight(self) -> int:
        return sum(t.updates_applied for t in self.trials)


@dataclass
class SynchronousRun:
    weights: SharedNetWeights
    checkpoints: List[CheckpointRecord] = field(default_factory=list)
    updates_per_weight: int = 0
    samples: int = 0
    episodes: int = 0
    device_counters: Optional[Dict[str, int]] = None
