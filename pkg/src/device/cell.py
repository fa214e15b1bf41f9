"""Threshold-switching memristor model and differential-pair weight encoding."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from src.schema import DeviceConfig, VariationMode


@dataclass(frozen=True)
class DeviceCell:
    g: float
    vth_set: float
    vth_reset: float


@dataclass(frozen=True)
class DifferentialPair:
    pos: DeviceCell
    neg: DeviceCell


def sample_thresholds(
    mode: VariationMode, shape: Tuple[int, ...], rng: np.random.Generator, config: DeviceConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """(vth_set, vth_reset) matrices for one array of devices."""
    if mode == VariationMode.ideal:
        nominal = np.full(shape, config.vth_nominal)
        return nominal, nominal.copy()
    if mode == VariationMode.pct30:
        lo = config.vth_nominal * (1.0 - config.pct_spread)
        hi = config.vth_nominal * (1.0 + config.pct_spread)
    else:
        lo, hi = config.full_range_low, config.full_range_high
    return rng.uniform(lo, hi, size=shape), rng.uniform(lo, hi, size=shape)


def window(g, config: DeviceConfig, set_direction: bool):
    """Soft saturation: set slows toward g_max, reset slows toward g_min."""
    span = config.g_max - config.g_min
    if set_direction:
        return (config.g_max - g) / span
    return (g - config.g_min) / span


def switching_step(g, vth, v_abs, duration: float, config: DeviceConfig, set_direction: bool):
    """Conductance magnitude change of a pulse |v| against threshold vth; zero at or below threshold."""
    over = np.asarray(v_abs, dtype=np.float64) - vth
    active = over > 0.0
    rate = config.rate * duration * np.exp(np.where(active, over, 0.0) / config.v0)
    return np.where(active, rate * window(g, config, set_direction), 0.0)


def pulse_arrays(g, vth, v_abs, duration: float, config: DeviceConfig, set_direction: bool) -> np.ndarray:
    """New conductances after one pulse on every device of an array."""
    dg = switching_step(g, vth, v_abs, duration, config, set_direction)
    out = g + dg if set_direction else g - dg
    return np.clip(out, config.g_min, config.g_max)


def apply_pulse(cell: DeviceCell, v: float, duration: float, config: DeviceConfig) -> DeviceCell:
    """Positive v sets (against vth_set), negative v resets (against vth_reset)."""
    if duration <= 0:
        raise ValueError("pulse duration must be > 0")
    if v == 0:
        return cell
    set_direction = v > 0
    vth = cell.vth_set if set_direction else cell.vth_reset
    g = float(pulse_arrays(np.float64(cell.g), vth, abs(v), duration, config, set_direction))
    return replace(cell, g=g)


def read_weight(pair: DifferentialPair, config: DeviceConfig) -> float:
    return config.k_w * (pair.pos.g - pair.neg.g)


def pair_conductances(target_w, config: DeviceConfig):
    """(g_pos, g_neg) placing the weight symmetrically around mid-range."""
    half = np.asarray(target_w, dtype=np.float64) / (2.0 * config.k_w)
    return config.g_mid + half, config.g_mid - half


def write_exact(pair: DifferentialPair, target_w: float, config: DeviceConfig) -> Tuple[DifferentialPair, bool]:
    """Program the pair to target_w directly; out-of-range targets are clamped and reported."""
    clamped = min(max(target_w, -config.w_max), config.w_max)
    g_pos, g_neg = pair_conductances(clamped, config)
    new = DifferentialPair(pos=replace(pair.pos, g=float(g_pos)), neg=replace(pair.neg, g=float(g_neg)))
    return new, clamped != target_w
