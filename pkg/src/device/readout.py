"""Hardware read path: 8-bit ADC and the LFSR xor CASR random byte generator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from src.pendulum.dynamics import Action
from src.schema import DeviceConfig
from src.seeding import derive_seed

MASK16 = 0xFFFF
# Cells running rule 150 in the otherwise rule-90 CASR.
CASR_RULE150 = 0x0020


def adc_quantize(v: float, full_scale: float, bits: int = 8) -> float:
    """
    Signed ADC with codes -(2^(b-1) - 1) .. 2^(b-1) - 1 mapped to +-full_scale.

    Zero is a level; out-of-range inputs saturate at +-full_scale.
    """
    if full_scale <= 0:
        raise ValueError("full_scale must be > 0")
    top = (1 << (bits - 1)) - 1
    code = round(v / full_scale * top)
    code = min(max(code, -top), top)
    return code * full_scale / top


def quantize_probability(p: float, bits: int = 8) -> float:
    """Unsigned digitization of the action output onto 2^bits - 1 steps."""
    top = (1 << bits) - 1
    return round(min(max(p, 0.0), 1.0) * top) / top


# ----------------------------
# Random bytes
# ----------------------------

def lfsr_step(lfsr: int) -> int:
    """16-bit Fibonacci LFSR, polynomial x^16 + x^14 + x^13 + x^11 + 1."""
    bit = ((lfsr >> 0) ^ (lfsr >> 2) ^ (lfsr >> 3) ^ (lfsr >> 5)) & 1
    return (lfsr >> 1) | (bit << 15)


def casr_step(casr: int) -> int:
    """
    Hybrid rule-90/150 cellular automaton, 16 cells, null boundaries.

    Cell 5 also feeds back its own state. From 0x0001 the register cycles through 64897
    states; xored with the LFSR the byte stream repeats after about 4.25e9 draws.
    """
    return ((casr << 1) ^ (casr >> 1) ^ (casr & CASR_RULE150)) & MASK16


@dataclass(frozen=True)
class RngState:
    lfsr: int = 0xACE1
    casr: int = 0x0001

    def __post_init__(self):
        if not (0 < self.lfsr <= MASK16):
            raise ValueError("LFSR register must be a nonzero 16-bit value")
        if not (0 < self.casr <= MASK16):
            raise ValueError("CASR register must be a nonzero 16-bit value")

    @classmethod
    def from_seed(cls, seed: int) -> "RngState":
        lfsr = seed & MASK16 or 0xACE1
        casr = (seed >> 16) & MASK16 or 0x0001
        return cls(lfsr=lfsr, casr=casr)


def rng8(state: RngState) -> Tuple[int, RngState]:
    """Step both registers once; the byte is the XOR of their low 8 bits."""
    lfsr = lfsr_step(state.lfsr)
    casr = casr_step(state.casr)
    return (lfsr ^ casr) & 0xFF, RngState(lfsr=lfsr, casr=casr)


def sample_action(p: float, state: RngState) -> Tuple[Action, RngState]:
    """Comparator: CCW iff the random byte is below the 8-bit code of p."""
    threshold = round(min(max(p, 0.0), 1.0) * 255)
    byte, state = rng8(state)
    return (Action.CCW if byte < threshold else Action.CW), state


class HardwareRng:
    """Mutable holder for one learner's RngState."""

    def __init__(self, state: RngState):
        self.state = state

    @classmethod
    def for_device(cls, config: DeviceConfig, *keys: int) -> "HardwareRng":
        """Registers seeded from the device's seed and rng_seed; keys separate the streams of one device."""
        return cls(RngState.from_seed(derive_seed(config.seed, config.rng_seed, *keys)))

    def action(self, p: float) -> Action:
        a, self.state = sample_action(p, self.state)
        return a
