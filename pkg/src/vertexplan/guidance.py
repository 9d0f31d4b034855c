"""Vertex-ness probability rasters: construction, masking, sampling, VGM1 I/O.

A guidance map assigns every pixel a probability in [0, 1] of being worth
sampling. The oracle constructors emulate a trained predictor by depositing
Gaussian kernels along the A* path (path mode) or only at its turning points
(vertex mode). Sampling draws a pixel proportionally to its probability and
jitters uniformly inside the pixel's unit square.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AllMasked, NotSamplable, ParseError
from .gridmap import CellIndex, GridMap
from .oracle import astar, extract_vertices

GUIDANCE_MAGIC = b"VGM1"
DEFAULT_SIGMA = 4.0
KERNEL_TRUNCATION = 3.0  # kernels are cut off at this many sigmas


@dataclass(frozen=True)
class GuidanceMap:
    width: int
    height: int
    prob: np.ndarray  # float32, shape (height, width), each value in [0, 1]

    def __post_init__(self):
        prob = np.ascontiguousarray(self.prob, dtype=np.float32)
        if prob.shape != (self.height, self.width):
            raise ValueError(f"prob shape {prob.shape} != ({self.height}, {self.width})")
        if not np.all(np.isfinite(prob)):
            raise ValueError("guidance values must be finite")
        if prob.size and (prob.min() < 0.0 or prob.max() > 1.0):
            raise ValueError("guidance values must lie in [0, 1]")
        object.__setattr__(self, "prob", prob)
        prob.setflags(write=False)

    @cached_property
    def _cumulative(self) -> np.ndarray:
        return np.cumsum(self.prob.ravel(), dtype=np.float64)

    @property
    def total_mass(self) -> float:
        return float(self._cumulative[-1]) if self.prob.size else 0.0

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.prob))

    def __eq__(self, other):
        if not isinstance(other, GuidanceMap):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.prob.tobytes() == other.prob.tobytes())

    def __hash__(self):
        return hash((self.width, self.height, self.prob.tobytes()))


@dataclass(frozen=True)
class MaskThreshold:
    tau: float

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError(f"tau must lie strictly in (0, 1), got {self.tau}")


def oracle_guidance(grid: GridMap, start: CellIndex | None = None,
                    goal: CellIndex | None = None, mode: str = "vertex",
                    sigma: float = DEFAULT_SIGMA) -> GuidanceMap:
    """Heatmap around the optimal path (mode="path") or its vertices
    (mode="vertex"): one unit-amplitude Gaussian per center cell, summed and
    clamped to 1. sigma=0 marks exactly the center cells with probability 1.
    """
    if mode not in ("path", "vertex"):
        raise ValueError(f"mode must be 'path' or 'vertex', got {mode!r}")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    start = grid.start if start is None else start
    goal = grid.goal if goal is None else goal
    path = astar(grid, start, goal)
    centers = path.cells if mode == "path" else extract_vertices(path).vertices

    acc = np.zeros((grid.height, grid.width), dtype=np.float64)
    if sigma == 0.0:
        for c in centers:
            acc[c.y, c.x] = 1.0
    else:
        reach = int(math.ceil(KERNEL_TRUNCATION * sigma))
        offs = np.arange(-reach, reach + 1, dtype=np.float64)
        ox, oy = np.meshgrid(offs, offs)
        d2 = ox ** 2 + oy ** 2
        kernel = np.exp(-d2 / (2.0 * sigma * sigma))
        kernel[d2 > (KERNEL_TRUNCATION * sigma) ** 2] = 0.0
        for c in centers:
            y0 = max(c.y - reach, 0)
            y1 = min(c.y + reach, grid.height - 1)
            x0 = max(c.x - reach, 0)
            x1 = min(c.x + reach, grid.width - 1)
            acc[y0:y1 + 1, x0:x1 + 1] += kernel[
                y0 - c.y + reach:y1 - c.y + reach + 1,
                x0 - c.x + reach:x1 - c.x + reach + 1]
    np.clip(acc, 0.0, 1.0, out=acc)
    return GuidanceMap(grid.width, grid.height, acc.astype(np.float32))


def apply_mask(g: GuidanceMap, tau: MaskThreshold) -> GuidanceMap:
    """Zero every value below tau; values >= tau pass through unchanged."""
    out = g.prob.copy()
    out[out < tau.tau] = 0.0
    if not out.any():
        raise AllMasked(f"no probability survives masking at tau={tau.tau}")
    return GuidanceMap(g.width, g.height, out)


def sample_point(g: GuidanceMap, rng: np.random.Generator) -> tuple[float, float]:
    """Draw pixel i with probability prob[i]/sum(prob), uniform inside it."""
    cdf = g._cumulative
    total = g.total_mass
    if total <= 0.0:
        raise NotSamplable("guidance map has no positive probability mass")
    r = rng.random() * total
    flat = int(np.searchsorted(cdf, r, side="right"))
    flat = min(flat, g.prob.size - 1)
    py, px = divmod(flat, g.width)
    return (px + rng.random(), py + rng.random())


def write_guidance(g: GuidanceMap) -> bytes:
    header = struct.pack("<4sII", GUIDANCE_MAGIC, g.width, g.height)
    return header + g.prob.astype("<f4", copy=False).tobytes()


def read_guidance(data: bytes) -> GuidanceMap:
    if len(data) < 12:
        raise ParseError("guidance file shorter than its 12-byte header")
    magic, width, height = struct.unpack_from("<4sII", data, 0)
    if magic != GUIDANCE_MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {GUIDANCE_MAGIC!r}")
    if width == 0 or height == 0:
        raise ParseError("guidance dimensions must be positive")
    expected = width * height * 4
    if expected != len(data) - 12:
        raise ParseError(
            f"payload holds {len(data) - 12} bytes, dimensions require {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width)
    if not np.all(np.isfinite(values)):
        raise ParseError("guidance values must be finite")
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise ParseError("guidance values must lie in [0, 1]")
    return GuidanceMap(int(width), int(height), values.copy())


def save_guidance(g: GuidanceMap, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_guidance(g))


def load_guidance(path) -> GuidanceMap:
    with open(path, "rb") as fh:
        return read_guidance(fh.read())
