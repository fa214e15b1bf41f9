"""Variable discount rate: a 1-bit hill climber on the windowed mean t2f."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class DiscountState:
    gamma: float
    direction: int = 1
    last_mean_t2f: Optional[float] = None
    adjustments: int = 0


def adjust_discount_rate(
    successes: Sequence[bool],
    mean_t2f: float,
    state: DiscountState,
    *,
    window: int = 50,
    step: float = 0.02,
    threshold: float = 0.35,
    gamma_min: float = 0.5,
    gamma_max: float = 0.99,
) -> DiscountState:
    """
    Called once per window of trials. Below the success-rate threshold gamma moves by
    one step, keeping its direction while the mean t2f improves and reversing otherwise.
    The first adjustment goes up.
    """
    if len(successes) != window:
        raise ValueError(f"expected {window} trial outcomes, got {len(successes)}")

    rate = sum(1 for s in successes if s) / window
    if rate >= threshold:
        return state

    if state.last_mean_t2f is None:
        direction = 1
    elif mean_t2f > state.last_mean_t2f:
        direction = state.direction
    else:
        direction = -state.direction

    gamma = min(max(state.gamma + direction * step, gamma_min), gamma_max)
    return DiscountState(
        gamma=gamma,
        direction=direction,
        last_mean_t2f=mean_t2f,
        adjustments=state.adjustments + 1,
    )
