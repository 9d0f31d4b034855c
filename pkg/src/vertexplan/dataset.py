"""Ground-truth vertex rasters, the reference focal loss, and dataset export.

Ground-truth images follow the 0/1 convention (vertex pixels are 0 on a
background of 1s). Exported guidance targets flip that polarity: the VGM1
raster holds 1.0 at vertex pixels so it can be consumed directly as a
"probability of being a vertex" map. The flip is recorded in the manifest.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gridmap import CellClass, CellIndex, GridMap, sample_start_goal_pairs, write_map
from .guidance import GuidanceMap, write_guidance
from .oracle import astar, extract_vertices
from .seeding import stable_seed

POLARITY_NOTE = ("targets use guidance polarity: vertex pixels are 1.0, background 0.0 "
                 "(inverse of the 0-on-1 ground-truth image convention); no blur applied")


@dataclass(frozen=True)
class VertexRaster:
    """Binary image: 0 exactly at vertex pixels, 1 everywhere else."""

    width: int
    height: int
    values: np.ndarray  # uint8 in {0, 1}, shape (height, width)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.uint8)
        if values.shape != (self.height, self.width):
            raise ValueError("values shape does not match dimensions")
        if values.max(initial=1) > 1:
            raise ValueError("vertex raster values must be 0 or 1")
        object.__setattr__(self, "values", values)
        values.setflags(write=False)

    def zero_count(self) -> int:
        return int(self.values.size - np.count_nonzero(self.values))


@dataclass(frozen=True)
class FocalParams:
    gamma: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be finite and >= 0")


def make_ground_truth(grid: GridMap, start: CellIndex | None = None,
                      goal: CellIndex | None = None) -> VertexRaster:
    start = grid.start if start is None else start
    goal = grid.goal if goal is None else goal
    path = astar(grid, start, goal)
    vertices = extract_vertices(path).vertices
    values = np.ones((grid.height, grid.width), dtype=np.uint8)
    for v in vertices:
        values[v.y, v.x] = 0
    return VertexRaster(grid.width, grid.height, values)


def focal_loss(p_t: float, params: FocalParams = FocalParams()) -> float:
    """-(1 - p_t)^gamma * ln(p_t); reduces to cross-entropy at gamma = 0."""
    if not (isinstance(p_t, (int, float)) and math.isfinite(p_t)):
        raise DomainError(f"p_t must be a finite number, got {p_t!r}")
    if p_t <= 0.0 or p_t > 1.0:
        raise DomainError(f"p_t must lie in (0, 1], got {p_t}")
    return -math.pow(1.0 - p_t, params.gamma) * math.log(p_t)


def _stamped_copy(grid: GridMap, start: CellIndex, goal: CellIndex) -> GridMap:
    cells = grid.cells.copy()
    cells[grid.start.y, grid.start.x] = CellClass.FREE
    cells[grid.goal.y, grid.goal.x] = CellClass.FREE
    cells[start.y, start.x] = CellClass.START
    cells[goal.y, goal.x] = CellClass.GOAL
    return GridMap.from_cells(cells)


def guidance_target(raster: VertexRaster) -> GuidanceMap:
    """Polarity-flipped raster: probability 1.0 at vertex pixels."""
    prob = (raster.values == 0).astype(np.float32)
    return GuidanceMap(raster.width, raster.height, prob)


def export_dataset(maps: list[GridMap], n_starts: int, n_goals: int, out_dir,
                   split: float = 0.7, seed: int = 0) -> dict:
    """Write per-instance VMAP1 maps and VGM1 vertex targets plus a manifest.

    The train/test split is by map (all instances of one map share a split),
    with the first round(split * n_maps) maps as the training set.
    """
    os.makedirs(out_dir, exist_ok=True)
    n_train = int(round(split * len(maps)))
    instances = []
    for mi, base in enumerate(maps):
        pairs = sample_start_goal_pairs(base, n_starts, n_goals,
                                        seed=stable_seed(seed, "pairs", mi))
        tag = "train" if mi < n_train else "test"
        for pi, (s, g) in enumerate(pairs):
            stamped = _stamped_copy(base, s, g)
            map_name = f"map{mi:04d}_p{pi:03d}.vmap"
            target_name = f"map{mi:04d}_p{pi:03d}.vgm"
            with open(os.path.join(out_dir, map_name), "wb") as fh:
                fh.write(write_map(stamped))
            target = guidance_target(make_ground_truth(stamped, s, g))
            with open(os.path.join(out_dir, target_name), "wb") as fh:
                fh.write(write_guidance(target))
            instances.append({
                "map_file": map_name,
                "target_file": target_name,
                "start": [s.x, s.y],
                "goal": [g.x, g.y],
                "split": tag,
            })
    manifest = {"seed": seed, "sigma_note": POLARITY_NOTE, "instances": instances}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
