"""
CSV results and the run manifest.

Every CSV starts with a header row, uses "\\n" line endings and carries no timestamps,
so two runs with the same seed and config produce identical files. Floats are written
with repr(); a missing efficiency is written as "n/a".

manifest.txt is one key=value pair per line, keys sorted.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from src import __version__
from src.harness.metrics import NOT_APPLICABLE
from src.pipeline.resolve import config_digest
from src.schema import ExperimentConfig
from src.training.records import CheckpointRecord, TrialRecord

logger = logging.getLogger(__name__)

TRIAL_COLUMNS = ("trial", "steps_survived", "updates", "gamma", "success", "diverged")
CHECKPOINT_COLUMNS = ("samples", "time_steps", "updates_per_weight", "mean_t2f")

POPULATION_NOTE = (
    "Exact/Manhattan rows average over (pre-trained seed x pendulum variation) agents; "
    "updates per weight count re-training only"
)


def _fmt(value: Any) -> str:
    if value is None:
        return NOT_APPLICABLE
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
    logger.debug("wrote %s", path)
    return path


def read_csv(path: str | Path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def write_trials_csv(path: str | Path, trials: Sequence[TrialRecord]) -> Path:
    return write_csv(
        path,
        TRIAL_COLUMNS,
        (
            {
                "trial": i,
                "steps_survived": t.steps_survived,
                "updates": t.updates_applied,
                "gamma": float(t.gamma),
                "success": t.success,
                "diverged": t.diverged,
            }
            for i, t in enumerate(trials, start=1)
        ),
    )


def write_checkpoints_csv(path: str | Path, checkpoints: Sequence[CheckpointRecord]) -> Path:
    return write_csv(
        path,
        CHECKPOINT_COLUMNS,
        (
            {
                "samples": c.samples,
                "time_steps": c.time_steps,
                "updates_per_weight": c.updates_per_weight,
                "mean_t2f": float(c.mean_t2f),
            }
            for c in checkpoints
        ),
    )


def write_manifest(
    out_dir: str | Path,
    config: ExperimentConfig,
    seeds: Mapping[str, int],
    extra: Optional[Mapping[str, Any]] = None,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: Dict[str, str] = {
        "code_version": __version__,
        "config_sha256": config_digest(config),
        "config_version": config.version,
        "population_note": POPULATION_NOTE,
        "scale": config.harness.scale.value,
    }
    for name, value in seeds.items():
        entries[f"seed.{name}"] = str(value)
    for name, value in (extra or {}).items():
        entries[name] = _fmt(value)
    path = out_dir / "manifest.txt"
    path.write_text("".join(f"{k}={entries[k]}\n" for k in sorted(entries)), encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out
