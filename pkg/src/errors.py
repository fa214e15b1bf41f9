"""Categorized exceptions shared by the simulator and the CLI."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all simulator errors."""

    category = "simulation"
    exit_code = 1


class ConfigurationError(SimulationError, ValueError):
    """Invalid or inconsistent configuration (bad section, empty pool, wrong approach/scenario)."""

    category = "configuration"
    exit_code = 2


class DivergedIntegrationError(SimulationError, RuntimeError):
    """The pendulum integrator produced a non-finite state."""

    category = "divergence"
    exit_code = 3


class CheckpointFormatError(SimulationError, ValueError):
    """A weight checkpoint file does not follow the documented format."""

    category = "checkpoint"
    exit_code = 4
