"""Memristive devices, crossbars, read path and weight stores."""

from src.device.cell import (
    DeviceCell,
    DifferentialPair,
    apply_pulse,
    read_weight,
    sample_thresholds,
    write_exact,
)
from src.device.crossbar import Crossbar, DeviceCounters, dump_crossbar, load_crossbar_dump
from src.device.readout import (
    HardwareRng,
    RngState,
    adc_quantize,
    quantize_probability,
    rng8,
    sample_action,
)
from src.device.store import CrossbarWeights, SoftwareWeights, make_store

__all__ = [
    "Crossbar",
    "CrossbarWeights",
    "DeviceCell",
    "DeviceCounters",
    "DifferentialPair",
    "HardwareRng",
    "RngState",
    "SoftwareWeights",
    "adc_quantize",
    "apply_pulse",
    "dump_crossbar",
    "load_crossbar_dump",
    "make_store",
    "quantize_probability",
    "read_weight",
    "rng8",
    "sample_action",
    "sample_thresholds",
    "write_exact",
]
