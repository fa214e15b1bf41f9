"""
Weight stores behind the training loops.

SoftwareWeights is the software-exact path (float weights, clamped to +-w_max).
CrossbarWeights keeps every layer on a Crossbar and applies the hardware update rules.
Both expose the same interface so a training loop does not care which one it holds.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from src.device.crossbar import Crossbar, DeviceCounters, dump_crossbar
from src.network.weights import SeparateNetWeights, SharedNetWeights
from src.schema import DeviceConfig, UpdateRule

logger = logging.getLogger(__name__)

Weights = Union[SeparateNetWeights, SharedNetWeights]


class SoftwareWeights:
    rule = UpdateRule.exact
    hardware = False

    def __init__(self, weights: Weights, w_max: float):
        self._weights = weights.copy()
        self.w_max = w_max
        self.counters = DeviceCounters()
        self._clip_all()

    def _clip_all(self) -> None:
        for name, arr in self._weights.layers().items():
            clipped = np.clip(arr, -self.w_max, self.w_max)
            self.counters.saturations += int(np.count_nonzero(clipped != arr))
            setattr(self._weights, name, clipped)

    def read(self) -> Weights:
        return self._weights

    def snapshot(self) -> Weights:
        return self._weights.copy()

    def update(self, delta: Weights) -> None:
        for name in self._weights.layer_order:
            arr = getattr(self._weights, name) + getattr(delta, name)
            setattr(self._weights, name, arr)
        self._clip_all()


class CrossbarWeights:
    """
    Network weights on differential-pair crossbars.

    Initial weights are transferred with exact writes; afterwards the store only changes
    through pulses of the configured rule (manhattan or variable_amplitude).
    """

    hardware = True

    def __init__(self, weights: Weights, config: DeviceConfig, rng: np.random.Generator, rule: UpdateRule):
        if rule == UpdateRule.exact:
            raise ValueError("CrossbarWeights needs a pulse-based update rule")
        self.rule = rule
        self.config = config
        self._cls = type(weights)
        self.crossbars: Dict[str, Crossbar] = {}
        for name, arr in weights.layers().items():
            xbar = Crossbar.create(arr.shape, config, rng)
            xbar.write_exact(arr)
            self.crossbars[name] = xbar
        self._cache: Weights | None = None

    @property
    def counters(self) -> DeviceCounters:
        total = DeviceCounters()
        for xbar in self.crossbars.values():
            total = total.merge(xbar.counters)
        return total

    def read(self) -> Weights:
        if self._cache is None:
            self._cache = self._cls(**{name: xbar.weights() for name, xbar in self.crossbars.items()})
        return self._cache

    def snapshot(self) -> Weights:
        return self.read().copy()

    def update(self, delta: Weights) -> None:
        cfg = self.config
        for name, xbar in self.crossbars.items():
            d = getattr(delta, name)
            if self.rule == UpdateRule.manhattan:
                xbar.manhattan_update(np.sign(d), cfg.pulse_amplitude, cfg.pulse_duration)
            else:
                xbar.variable_amplitude_update(d)
        self._cache = None

    def dump(self, out_dir: str | Path) -> None:
        out_dir = Path(out_dir)
        for name, xbar in self.crossbars.items():
            dump_crossbar(xbar, out_dir / f"crossbar_{name}.csv")
        logger.info("crossbar dump written to %s", out_dir)


def make_store(
    weights: Weights, rule: UpdateRule, config: DeviceConfig, rng: np.random.Generator | None = None
) -> Union[SoftwareWeights, CrossbarWeights]:
    if rule == UpdateRule.exact:
        return SoftwareWeights(weights, config.w_max)
    if rng is None:
        raise ValueError("a device rng is required for crossbar weights")
    return CrossbarWeights(weights, config, rng, rule)
