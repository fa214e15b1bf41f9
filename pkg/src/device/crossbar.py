"""Crossbar of differential pairs: exact writes, Manhattan pulses and variable-amplitude programming."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from src.device.cell import DeviceCell, DifferentialPair, pair_conductances, pulse_arrays, sample_thresholds
from src.schema import DeviceConfig, VariationMode

logger = logging.getLogger(__name__)

DUMP_COLUMNS = ("row", "col", "g_pos", "g_neg", "vth_set_pos", "vth_reset_pos", "vth_set_neg", "vth_reset_neg")


@dataclass
class DeviceCounters:
    saturations: int = 0
    floor_skips: int = 0
    half_select_disturbs: int = 0
    pulses: int = 0

    def merge(self, other: "DeviceCounters") -> "DeviceCounters":
        return DeviceCounters(
            saturations=self.saturations + other.saturations,
            floor_skips=self.floor_skips + other.floor_skips,
            half_select_disturbs=self.half_select_disturbs + other.half_select_disturbs,
            pulses=self.pulses + other.pulses,
        )


def _as_matrix(a: np.ndarray) -> np.ndarray:
    # vectors are a single crossbar column
    a = np.asarray(a, dtype=np.float64)
    return a.reshape(-1, 1) if a.ndim == 1 else a


class Crossbar:
    """
    One weight matrix stored as a positive and a negative device array.

    1-D weight vectors are laid out as a single column. The shape is fixed at construction.
    """

    def __init__(
        self,
        shape: Tuple[int, ...],
        config: DeviceConfig,
        vth_set_pos: np.ndarray,
        vth_reset_pos: np.ndarray,
        vth_set_neg: np.ndarray,
        vth_reset_neg: np.ndarray,
    ):
        self._shape = tuple(shape)
        self.config = config
        grid = _as_matrix(np.zeros(self._shape)).shape
        self.g_pos = np.full(grid, config.g_mid)
        self.g_neg = np.full(grid, config.g_mid)
        self.vth_set_pos = _as_matrix(vth_set_pos).copy()
        self.vth_reset_pos = _as_matrix(vth_reset_pos).copy()
        self.vth_set_neg = _as_matrix(vth_set_neg).copy()
        self.vth_reset_neg = _as_matrix(vth_reset_neg).copy()
        for arr in (self.vth_set_pos, self.vth_reset_pos, self.vth_set_neg, self.vth_reset_neg):
            if arr.shape != grid:
                raise ValueError(f"threshold shape {arr.shape} does not match crossbar {grid}")
        self.counters = DeviceCounters()

    @classmethod
    def create(
        cls,
        shape: Tuple[int, ...],
        config: DeviceConfig,
        rng: np.random.Generator,
        mode: VariationMode | None = None,
    ) -> "Crossbar":
        mode = config.variation if mode is None else mode
        grid = _as_matrix(np.zeros(shape)).shape
        set_pos, reset_pos = sample_thresholds(mode, grid, rng, config)
        set_neg, reset_neg = sample_thresholds(mode, grid, rng, config)
        return cls(shape, config, set_pos, reset_pos, set_neg, reset_neg)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self._shape

    # ----------------------------
    # Read path
    # ----------------------------

    def weights(self) -> np.ndarray:
        return (self.config.k_w * (self.g_pos - self.g_neg)).reshape(self._shape)

    def pair(self, index: Tuple[int, ...]) -> DifferentialPair:
        i, j = (index[0], 0) if len(self._shape) == 1 else index
        return DifferentialPair(
            pos=DeviceCell(float(self.g_pos[i, j]), float(self.vth_set_pos[i, j]), float(self.vth_reset_pos[i, j])),
            neg=DeviceCell(float(self.g_neg[i, j]), float(self.vth_set_neg[i, j]), float(self.vth_reset_neg[i, j])),
        )

    # ----------------------------
    # Write paths
    # ----------------------------

    def write_exact(self, target: np.ndarray) -> int:
        """Program every pair to its target weight; returns the number of clamped targets."""
        target = _as_matrix(target)
        w_max = self.config.w_max
        clamped = np.clip(target, -w_max, w_max)
        saturated = int(np.count_nonzero(clamped != target))
        self.g_pos, self.g_neg = pair_conductances(clamped, self.config)
        self.counters.saturations += saturated
        return saturated

    def manhattan_update(self, sign_matrix: np.ndarray, amplitude: float, duration: float) -> None:
        """Fixed pulses in four crossbar-wide phases: set-pos, reset-neg, set-neg, reset-pos."""
        sign = np.sign(_as_matrix(sign_matrix))
        if sign.shape != self.g_pos.shape:
            raise ValueError(f"sign matrix shape {sign.shape} does not match crossbar {self.g_pos.shape}")
        up = sign > 0
        down = sign < 0
        if not (up.any() or down.any()):
            return
        cfg = self.config

        self.g_pos = np.where(up, pulse_arrays(self.g_pos, self.vth_set_pos, amplitude, duration, cfg, True), self.g_pos)
        self.g_neg = np.where(up, pulse_arrays(self.g_neg, self.vth_reset_neg, amplitude, duration, cfg, False), self.g_neg)
        self.g_neg = np.where(down, pulse_arrays(self.g_neg, self.vth_set_neg, amplitude, duration, cfg, True), self.g_neg)
        self.g_pos = np.where(down, pulse_arrays(self.g_pos, self.vth_reset_pos, amplitude, duration, cfg, False), self.g_pos)

        touched = up | down
        self.counters.pulses += 2 * int(np.count_nonzero(touched))
        at_rail = (
            (self.g_pos <= cfg.g_min) | (self.g_pos >= cfg.g_max) | (self.g_neg <= cfg.g_min) | (self.g_neg >= cfg.g_max)
        )
        self.counters.saturations += int(np.count_nonzero(touched & at_rail))

    def programming_voltage(self, dg_target: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Total line voltage |V_X| + |V_Y| that moves a nominal mid-range device by dg_target.

        Returns (voltage, below_floor, capped). The voltage is capped so that the half of it
        seen by half-selected devices stays under the nominal threshold.
        """
        cfg = self.config
        v = cfg.vth_nominal + cfg.v0 * np.log(dg_target / (cfg.rate * cfg.va_pulse_duration * 0.5))
        cap = 2.0 * cfg.vth_nominal * (1.0 - cfg.half_select_margin)
        below_floor = v <= cfg.vth_nominal
        capped = v > cap
        return np.minimum(v, cap), below_floor, capped

    def variable_amplitude_update(self, dw: np.ndarray, eta: float = 1.0) -> None:
        """
        Program conductance changes proportional to eta * dw, line by line.

        Each selected device sees V = |V_X| + |V_Y| split evenly between its row and column
        lines; the other devices on that row and column see V/2.

        All selected devices are written in one vectorized pass. The voltage cap keeps V/2 under
        the nominal threshold, so on such devices no programmed row disturbs another and the
        result equals programming the rows one after the other. Devices whose variation puts
        their threshold below V/2 get the disturbance applied explicitly.
        """
        cfg = self.config
        delta = eta * _as_matrix(dw)
        if delta.shape != self.g_pos.shape:
            raise ValueError(f"update shape {delta.shape} does not match crossbar {self.g_pos.shape}")
        nonzero = delta != 0.0
        if not nonzero.any():
            return

        dg_target = np.abs(delta) / (2.0 * cfg.k_w)
        volts, below_floor, capped = self.programming_voltage(np.where(nonzero, dg_target, 1.0))
        program = nonzero & ~below_floor
        self.counters.floor_skips += int(np.count_nonzero(nonzero & below_floor))
        self.counters.saturations += int(np.count_nonzero(program & capped))
        if not program.any():
            return

        increase = program & (delta > 0)
        decrease = program & (delta < 0)
        dur = cfg.va_pulse_duration

        self.g_pos = np.where(increase, pulse_arrays(self.g_pos, self.vth_set_pos, volts, dur, cfg, True), self.g_pos)
        self.g_pos = np.where(decrease, pulse_arrays(self.g_pos, self.vth_reset_pos, volts, dur, cfg, False), self.g_pos)
        self.g_neg = np.where(increase, pulse_arrays(self.g_neg, self.vth_reset_neg, volts, dur, cfg, False), self.g_neg)
        self.g_neg = np.where(decrease, pulse_arrays(self.g_neg, self.vth_set_neg, volts, dur, cfg, True), self.g_neg)
        self.counters.pulses += 2 * int(np.count_nonzero(program))

        half = 0.5 * float(np.max(volts[program]))
        lowest = min(
            float(self.vth_set_pos.min()), float(self.vth_reset_pos.min()),
            float(self.vth_set_neg.min()), float(self.vth_reset_neg.min()),
        )
        if half > lowest:
            self._half_select(program, increase, volts)

    def _half_select(
        self,
        program: np.ndarray,
        increase: np.ndarray,
        volts: np.ndarray,
    ) -> None:
        """V/2 disturbance of unselected devices sharing a row or column with a programmed pair."""
        cfg = self.config
        dur = cfg.va_pulse_duration
        disturbed = np.zeros_like(program)
        rows, cols = program.shape
        for i in range(rows):
            for j in range(cols):
                if not program[i, j]:
                    continue
                half = 0.5 * float(volts[i, j])
                line = np.zeros_like(program)
                line[i, :] = True
                line[:, j] = True
                line[i, j] = False
                # pos array sees the polarity used on (i, j) of pos; neg array the opposite
                pos_set = bool(increase[i, j])
                if pos_set:
                    new_pos = pulse_arrays(self.g_pos, self.vth_set_pos, half, dur, cfg, True)
                    new_neg = pulse_arrays(self.g_neg, self.vth_reset_neg, half, dur, cfg, False)
                else:
                    new_pos = pulse_arrays(self.g_pos, self.vth_reset_pos, half, dur, cfg, False)
                    new_neg = pulse_arrays(self.g_neg, self.vth_set_neg, half, dur, cfg, True)
                changed = line & ((new_pos != self.g_pos) | (new_neg != self.g_neg))
                self.g_pos = np.where(line, new_pos, self.g_pos)
                self.g_neg = np.where(line, new_neg, self.g_neg)
                disturbed |= changed
        n = int(np.count_nonzero(disturbed))
        if n:
            self.counters.half_select_disturbs += n
            logger.debug("half-select disturbed %d device pairs", n)


def dump_crossbar(xbar: Crossbar, path: str | Path) -> Path:
    """Write one CSV row per pair: conductances and all four thresholds."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = xbar.g_pos.shape
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DUMP_COLUMNS)
        for i in range(rows):
            for j in range(cols):
                writer.writerow(
                    [
                        i,
                        j,
                        repr(float(xbar.g_pos[i, j])),
                        repr(float(xbar.g_neg[i, j])),
                        repr(float(xbar.vth_set_pos[i, j])),
                        repr(float(xbar.vth_reset_pos[i, j])),
                        repr(float(xbar.vth_set_neg[i, j])),
                        repr(float(xbar.vth_reset_neg[i, j])),
                    ]
                )
    return path


def load_crossbar_dump(path: str | Path, shape: Tuple[int, ...], config: DeviceConfig) -> Crossbar:
    """Rebuild a crossbar from a dump written by dump_crossbar."""
    grid = _as_matrix(np.zeros(shape)).shape
    cols = {name: np.zeros(grid) for name in DUMP_COLUMNS[2:]}
    with open(path, newline="", encoding="utf-8") as handle:
        for rec in csv.DictReader(handle):
            i, j = int(rec["row"]), int(rec["col"])
            for name in cols:
                cols[name][i, j] = float(rec[name])
    xbar = Crossbar(
        shape, config, cols["vth_set_pos"], cols["vth_reset_pos"], cols["vth_set_neg"], cols["vth_reset_neg"]
    )
    xbar.g_pos = cols["g_pos"]
    xbar.g_neg = cols["g_neg"]
    return xbar

