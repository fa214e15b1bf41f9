"""Forward passes and the one-step TD error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.network.weights import SeparateNetWeights, SharedNetWeights

HIDDEN_SLOPE = 1.0
OUTPUT_SLOPE = 8.0
PROB_EPS = 1e-6


def sigmoid(u, slope: float = HIDDEN_SLOPE):
    """Logistic function with a slope factor; the tanh form never overflows."""
    return 0.5 * (1.0 + np.tanh(0.5 * slope * np.asarray(u, dtype=np.float64)))


def clamp_probability(p: float) -> float:
    return min(max(float(p), PROB_EPS), 1.0 - PROB_EPS)


@dataclass
class ForwardTrace:
    """Input, hidden activations and the outputs of one forward pass."""

    x: np.ndarray
    hidden: np.ndarray
    value: Optional[float] = None
    prob: Optional[float] = None


def eval_forward(w: SeparateNetWeights, x: np.ndarray) -> ForwardTrace:
    """Evaluation net: sigmoid hidden layer, linear value output."""
    y = sigmoid(w.a @ x)
    return ForwardTrace(x=x, hidden=y, value=float(w.c @ y))


def action_forward(w: SeparateNetWeights, x: np.ndarray) -> ForwardTrace:
    """Action net: probability of a CCW push."""
    z = sigmoid(w.d @ x)
    p = clamp_probability(sigmoid(float(w.f @ z), OUTPUT_SLOPE))
    return ForwardTrace(x=x, hidden=z, prob=p)


def shared_forward(w: SharedNetWeights, x: np.ndarray) -> ForwardTrace:
    h = sigmoid(w.w_in @ x)
    p = clamp_probability(sigmoid(float(w.w_p @ h), OUTPUT_SLOPE))
    return ForwardTrace(x=x, hidden=h, value=float(w.w_v @ h), prob=p)


def log_policy(trace: ForwardTrace, q: int) -> float:
    """log pi(q|s) for q = 1 (CCW) or 0 (CW)."""
    return math.log(trace.prob) if q == 1 else math.log(1.0 - trace.prob)


def td_error(r: float, v_next: float, v: float, gamma: float, terminal: bool) -> float:
    """One-step TD error; a terminal step does not bootstrap."""
    if terminal:
        return r - v
    return r + gamma * v_next - v
