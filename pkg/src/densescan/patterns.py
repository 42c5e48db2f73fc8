"""Ground-truth sample generators with structure finer than the spot.

Targets are binary-valued (0/1) so post-deconvolution ringing and errors
read directly in the metrics. Generation is deterministic: RandomBlobs
draws its geometry from Python's random.Random, whose sequence is
stability-guaranteed across platforms and versions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .grid import Image


@dataclass(frozen=True)
class PointPair:
    """Two single-pixel unit impulses on the center row, ``separation``
    pixels apart."""

    separation: int

    def __post_init__(self) -> None:
        if int(self.separation) != self.separation or self.separation < 1:
            raise ValueError(f"separation must be an integer >= 1, got {self.separation}")


@dataclass(frozen=True)
class BarGrid:
    """Vertical bars with the given pixel period and duty cycle."""

    period: int
    duty: float

    def __post_init__(self) -> None:
        if int(self.period) != self.period or self.period < 1:
            raise ValueError(f"period must be an integer >= 1, got {self.period}")
        if not (0.0 < self.duty < 1.0):
            raise ValueError(f"duty must lie in (0, 1), got {self.duty}")


@dataclass(frozen=True)
class SiemensStar:
    spokes: int

    def __post_init__(self) -> None:
        if int(self.spokes) != self.spokes or self.spokes < 2:
            raise ValueError(f"spokes must be an integer >= 2, got {self.spokes}")


@dataclass(frozen=True)
class RandomBlobs:
    count: int
    radius: float
    seed: int

    def __post_init__(self) -> None:
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"count must be an integer >= 1, got {self.count}")
        if not (self.radius > 0) or not math.isfinite(self.radius):
            raise ValueError(f"radius must be > 0, got {self.radius}")


PatternSpec = PointPair | BarGrid | SiemensStar | RandomBlobs


def _point_pair(spec: PointPair, width: int, height: int) -> np.ndarray:
    cy = height // 2
    x1 = width // 2 - spec.separation // 2
    x2 = x1 + spec.separation
    if x1 < 1 or x2 > width - 2 or cy < 1 or cy > height - 2:
        raise ValueError(
            f"separation {spec.separation} does not fit a {width}x{height} canvas "
            "with a 1 px margin"
        )
    out = np.zeros((height, width))
    out[cy, x1] = 1.0
    out[cy, x2] = 1.0
    return out


def _bar_grid(spec: BarGrid, width: int, height: int) -> np.ndarray:
    on_width = max(1, min(spec.period, round(spec.period * spec.duty)))
    cols = (np.arange(width) % spec.period) < on_width
    out = np.zeros((height, width))
    out[:, cols] = 1.0
    return out


def _siemens_star(spec: SiemensStar, width: int, height: int) -> np.ndarray:
    radius = min(width, height) / 2.0 - 1.5
    if radius < 2.0:
        raise ValueError(f"canvas {width}x{height} too small for a star target")
    cy = (height - 1) / 2.0
    cx = (width - 1) / 2.0
    yy, xx = np.mgrid[0:height, 0:width]
    dy = yy - cy
    dx = xx - cx
    angle = np.arctan2(dy, dx) + np.pi  # [0, 2pi]
    wedge = np.floor(angle / (np.pi / spec.spokes)).astype(int)
    inside = np.hypot(dy, dx) <= radius
    return np.where(inside & (wedge % 2 == 0), 1.0, 0.0)


def _random_blobs(spec: RandomBlobs, width: int, height: int) -> np.ndarray:
    margin = int(math.ceil(spec.radius)) + 1
    if width - margin <= margin or height - margin <= margin:
        raise ValueError(
            f"blob radius {spec.radius} does not fit a {width}x{height} canvas"
        )
    rng = random.Random(spec.seed)
    out = np.zeros((height, width))
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(spec.count):
        cx = rng.randrange(margin, width - margin)
        cy = rng.randrange(margin, height - margin)
        out[np.hypot(yy - cy, xx - cx) <= spec.radius] = 1.0
    return out


def generate(spec: PatternSpec, width: int, height: int, pitch: float) -> Image:
    """Render a test target; values are 0/1, generation is deterministic.

    Raises ValueError when the requested geometry exceeds the canvas.
    """
    if width < 1 or height < 1:
        raise ValueError(f"canvas dimensions must be >= 1, got {width}x{height}")
    if isinstance(spec, PointPair):
        data = _point_pair(spec, width, height)
    elif isinstance(spec, BarGrid):
        data = _bar_grid(spec, width, height)
    elif isinstance(spec, SiemensStar):
        data = _siemens_star(spec, width, height)
    elif isinstance(spec, RandomBlobs):
        data = _random_blobs(spec, width, height)
    else:
        raise ValueError(f"unknown pattern spec {spec!r}")
    return Image(data, pitch)
