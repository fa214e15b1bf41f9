"""Value/policy surfaces over an (alpha, alpha_dot) grid for plotting."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from src.harness.results import write_csv
from src.network.forward import action_forward, eval_forward, shared_forward
from src.network.weights import SeparateNetWeights, SharedNetWeights
from src.pendulum.dynamics import PendulumState, normalize_state
from src.schema import PendulumConfig

SURFACE_COLUMNS = ("theta_dot", "alpha", "alpha_dot", "value", "prob")


@dataclass(frozen=True)
class SurfaceGrid:
    alphas: Sequence[float]
    alpha_dots: Sequence[float]
    theta_dots: Sequence[float] = (-1.0, 0.0, 1.0)

    @classmethod
    def regular(cls, config: PendulumConfig, n: int = 21) -> "SurfaceGrid":
        limit = config.upright_limit
        return cls(
            alphas=tuple(np.linspace(-limit, limit, n)),
            alpha_dots=tuple(np.linspace(-2.0, 2.0, n)),
        )


@dataclass(frozen=True)
class SurfacePoint:
    theta_dot: float
    alpha: float
    alpha_dot: float
    value: float
    prob: float


def sample_surfaces(
    weights: Union[SeparateNetWeights, SharedNetWeights], grid: SurfaceGrid, config: PendulumConfig
) -> List[SurfacePoint]:
    """Network outputs at theta = 0 for every grid point."""
    points = []
    for theta_dot in grid.theta_dots:
        for alpha in grid.alphas:
            for alpha_dot in grid.alpha_dots:
                x = normalize_state(PendulumState(0.0, theta_dot, alpha, alpha_dot), config.bounds)
                if isinstance(weights, SharedNetWeights):
                    tr = shared_forward(weights, x)
                    value, prob = tr.value, tr.prob
                else:
                    value = eval_forward(weights, x).value
                    prob = action_forward(weights, x).prob
                points.append(SurfacePoint(float(theta_dot), float(alpha), float(alpha_dot), value, prob))
    return points


def write_surfaces(path: str | Path, points: Sequence[SurfacePoint]) -> Path:
    return write_csv(path, SURFACE_COLUMNS, (asdict(p) for p in points))
