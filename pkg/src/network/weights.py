"""Weight containers for the separate (evaluation + action) and shared 5-6-1/5-6-2 networks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Dict, Tuple

import numpy as np
from typing_extensions import Self

N_INPUTS = 5
N_HIDDEN = 6

LAYER_SHAPES: Dict[str, Tuple[int, ...]] = {
    "a": (N_HIDDEN, N_INPUTS),
    "c": (N_HIDDEN,),
    "d": (N_HIDDEN, N_INPUTS),
    "f": (N_HIDDEN,),
    "w_in": (N_HIDDEN, N_INPUTS),
    "w_v": (N_HIDDEN,),
    "w_p": (N_HIDDEN,),
}


class _Layered:
    topology: ClassVar[str]
    layer_order: ClassVar[Tuple[str, ...]]

    @classmethod
    def zeros(cls) -> Self:
        return cls(**{name: np.zeros(LAYER_SHAPES[name]) for name in cls.layer_order})

    @classmethod
    def uniform(cls, rng: np.random.Generator, scale: float) -> Self:
        return cls(**{name: rng.uniform(-scale, scale, size=LAYER_SHAPES[name]) for name in cls.layer_order})

    def layers(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.layer_order}

    def copy(self) -> Self:
        return type(self)(**{k: v.copy() for k, v in self.layers().items()})


@dataclass(eq=False)
class SeparateNetWeights(_Layered):
    """Evaluation net (a, c) and action net (d, f)."""

    a: np.ndarray  # (6, 5) input -> hidden, evaluation
    c: np.ndarray  # (6,)   hidden -> value
    d: np.ndarray  # (6, 5) input -> hidden, action
    f: np.ndarray  # (6,)   hidden -> policy

    topology: ClassVar[str] = "separate"
    layer_order: ClassVar[Tuple[str, ...]] = ("a", "c", "d", "f")


@dataclass(eq=False)
class SharedNetWeights(_Layered):
    """One hidden layer feeding a linear value output and a policy output."""

    w_in: np.ndarray  # (6, 5) shared by value and policy
    w_v: np.ndarray   # (6,)
    w_p: np.ndarray   # (6,)

    topology: ClassVar[str] = "shared"
    layer_order: ClassVar[Tuple[str, ...]] = ("w_in", "w_v", "w_p")


def random_separate_weights(rng: np.random.Generator, scale: float = 0.3) -> SeparateNetWeights:
    return SeparateNetWeights.uniform(rng, scale)


def random_shared_weights(rng: np.random.Generator, scale: float = 0.3) -> SharedNetWeights:
    return SharedNetWeights.uniform(rng, scale)
