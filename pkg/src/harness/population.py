"""Agent populations: pendulum variation x weight seed."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import List, Tuple

from src.schema import Scale
from src.seeding import Stream, derive_seed, make_rng

VARIATION_STEPS: Tuple[int, ...] = (-10, -5, 0, 5, 10)
VARIATION_GRID: Tuple[Tuple[int, int], ...] = tuple(product(VARIATION_STEPS, VARIATION_STEPS))


@dataclass(frozen=True)
class AgentSpec:
    index: int
    mass_pct: int
    length_pct: int
    weight_seed: int
    device_seed: int


def build_population(
    scale: Scale,
    seed: int,
    *,
    desk_variations: int = 5,
    desk_seeds: int = 5,
    full_seeds: int = 100,
) -> List[AgentSpec]:
    """
    Full scale: all 25 (mass %, length %) pairs x 100 seeds.
    Desk scale: desk_variations pairs drawn without replacement x desk_seeds seeds.

    Agents sharing a seed index share weight_seed (hence the same pre-trained network);
    device seeds are distinct per agent.
    """
    if scale == Scale.full:
        variations = list(VARIATION_GRID)
        n_seeds = full_seeds
    else:
        picks = make_rng(seed, Stream.population).choice(len(VARIATION_GRID), size=desk_variations, replace=False)
        variations = [VARIATION_GRID[int(i)] for i in sorted(picks)]
        n_seeds = desk_seeds

    agents: List[AgentSpec] = []
    for (mass_pct, length_pct), k in product(variations, range(n_seeds)):
        idx = len(agents)
        agents.append(
            AgentSpec(
                index=idx,
                mass_pct=mass_pct,
                length_pct=length_pct,
                weight_seed=derive_seed(seed, Stream.weights, k),
                device_seed=derive_seed(seed, Stream.device, idx),
            )
        )
    return agents


def single_agent(seed: int, mass_pct: int = 0, length_pct: int = 0) -> AgentSpec:
    """The first seed of a population, on the given pendulum variation."""
    return AgentSpec(
        index=0,
        mass_pct=mass_pct,
        length_pct=length_pct,
        weight_seed=derive_seed(seed, Stream.weights, 0),
        device_seed=derive_seed(seed, Stream.device, 0),
    )
