"""Experiment harness: populations, metrics, results files, sweeps and the CLI."""

from src.harness.metrics import NOT_APPLICABLE, MetricsRecord, compute_metrics, efficiency
from src.harness.population import AgentSpec, build_population, single_agent
from src.harness.results import read_csv, read_manifest, write_csv, write_manifest

__all__ = [
    "NOT_APPLICABLE",
    "AgentSpec",
    "MetricsRecord",
    "build_population",
    "compute_metrics",
    "efficiency",
    "read_csv",
    "read_manifest",
    "single_agent",
    "write_csv",
    "write_manifest",
]
