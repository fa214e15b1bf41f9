"""
Weight checkpoint text format.

    # topology=separate inputs=5 hidden=6
    # layers=a:6x5,c:6,d:6x5,f:6
    <one number per line, %.17g, row-major, layers in the order above>

Shared networks use topology=shared and layers=w_in:6x5,w_v:6,w_p:6.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Dict, Union

import numpy as np

from src.errors import CheckpointFormatError
from src.network.weights import LAYER_SHAPES, N_HIDDEN, N_INPUTS, SeparateNetWeights, SharedNetWeights

Weights = Union[SeparateNetWeights, SharedNetWeights]

_TOPOLOGIES = {"separate": SeparateNetWeights, "shared": SharedNetWeights}
_HEADER_RE = re.compile(r"^# topology=(\w+) inputs=(\d+) hidden=(\d+)$")


def _shape_str(shape) -> str:
    return "x".join(str(n) for n in shape)


def _layers_line(cls) -> str:
    return "# layers=" + ",".join(f"{name}:{_shape_str(LAYER_SHAPES[name])}" for name in cls.layer_order)


def save_checkpoint(path: str | Path, weights: Weights) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# topology={weights.topology} inputs={N_INPUTS} hidden={N_HIDDEN}",
        _layers_line(type(weights)),
    ]
    for name in weights.layer_order:
        lines.extend("%.17g" % v for v in np.asarray(getattr(weights, name)).ravel())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path: str | Path) -> Weights:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CheckpointFormatError(f"cannot read checkpoint {path}: {e}") from e

    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise CheckpointFormatError(f"{path}: missing header")

    m = _HEADER_RE.match(lines[0])
    if not m:
        raise CheckpointFormatError(f"{path}: bad header {lines[0]!r}")
    topology, inputs, hidden = m.group(1), int(m.group(2)), int(m.group(3))
    if topology not in _TOPOLOGIES:
        raise CheckpointFormatError(f"{path}: unknown topology {topology!r}")
    if (inputs, hidden) != (N_INPUTS, N_HIDDEN):
        raise CheckpointFormatError(f"{path}: unsupported size inputs={inputs} hidden={hidden}")

    cls = _TOPOLOGIES[topology]
    if lines[1] != _layers_line(cls):
        raise CheckpointFormatError(f"{path}: layer line {lines[1]!r} does not match {topology}")

    try:
        values = np.array([float(v) for v in lines[2:]], dtype=np.float64)
    except ValueError as e:
        raise CheckpointFormatError(f"{path}: non-numeric value ({e})") from e

    expected = sum(int(np.prod(LAYER_SHAPES[name])) for name in cls.layer_order)
    if values.size != expected:
        raise CheckpointFormatError(f"{path}: expected {expected} values, found {values.size}")
    if not np.all(np.isfinite(values)):
        raise CheckpointFormatError(f"{path}: non-finite weight")

    layers: Dict[str, np.ndarray] = {}
    offset = 0
    for name in cls.layer_order:
        shape = LAYER_SHAPES[name]
        n = int(np.prod(shape))
        layers[name] = values[offset:offset + n].reshape(shape).copy()
        offset += n
    return cls(**layers)
