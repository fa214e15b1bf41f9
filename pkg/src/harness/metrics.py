"""t2f, updates per weight and weight-update efficiency."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.training.records import TrialRecord

NOT_APPLICABLE = "n/a"


@dataclass(frozen=True)
class MetricsRecord:
    mean_t2f: float
    updates_per_weight: float
    # None: updates were zero but t2f changed
    efficiency: Optional[float]

    def efficiency_text(self) -> str:
        return NOT_APPLICABLE if self.efficiency is None else repr(float(self.efficiency))


def efficiency(mean_t2f: float, pretrained_t2f: float, updates_per_weight: float) -> Optional[float]:
    """t2f improvement over the pre-trained network per update per weight."""
    improvement = mean_t2f - pretrained_t2f
    if updates_per_weight == 0:
        return 0.0 if improvement == 0 else None
    return improvement / updates_per_weight


def compute_metrics(
    trials: Sequence[TrialRecord], pretrained_t2f: float, updates_per_weight: float
) -> MetricsRecord:
    if not trials:
        raise ValueError("metrics need at least one test trial")
    mean_t2f = float(np.mean([t.steps_survived for t in trials]))
    return MetricsRecord(
        mean_t2f=mean_t2f,
        updates_per_weight=float(updates_per_weight),
        efficiency=efficiency(mean_t2f, pretrained_t2f, updates_per_weight),
    )
