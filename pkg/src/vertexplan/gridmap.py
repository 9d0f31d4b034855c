"""Grid-world representation, procedural map generation, and the VMAP1 file format.

Maps are dense occupancy grids with four cell classes:
0 = free, 1 = obstacle, 2 = start, 3 = goal. Row 0 is the top row;
cell (x, y) is column x of row y. Exactly one start and one goal cell
exist in every valid map, and they are also carried as explicit fields.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import GenerationFailed, InsufficientFreeSpace, ParseError

MAP_MAGIC = "VMAP1"

# Retry policy for generate_map: total start/goal draws before giving up,
# with a fresh obstacle layout every OBSTACLE_REGEN_PERIOD failed draws.
GENERATION_RETRY_LIMIT = 64
OBSTACLE_REGEN_PERIOD = 8

SHAPE_NAMES = ("triangle", "circle", "square", "bar", "u_shape")


class CellClass(IntEnum):
    FREE = 0
    OBSTACLE = 1
    START = 2
    GOAL = 3


class CellIndex(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class GridMap:
    """Immutable occupancy grid with a single start and goal cell."""

    width: int
    height: int
    cells: np.ndarray  # uint8, shape (height, width), row-major, row 0 = top
    start: CellIndex
    goal: CellIndex

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("map dimensions must be positive")
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if cells.shape != (self.height, self.width):
            raise ValueError(f"cells shape {cells.shape} != (height, width) = "
                             f"({self.height}, {self.width})")
        if cells.max(initial=0) > 3:
            raise ValueError("cell classes must be in 0..3")
        object.__setattr__(self, "cells", cells)
        cells.setflags(write=False)
        starts = np.argwhere(cells == CellClass.START)
        goals = np.argwhere(cells == CellClass.GOAL)
        if len(starts) != 1 or len(goals) != 1:
            raise ValueError("map must contain exactly one start and one goal cell")
        object.__setattr__(self, "start", CellIndex(int(starts[0][1]), int(starts[0][0])))
        object.__setattr__(self, "goal", CellIndex(int(goals[0][1]), int(goals[0][0])))

    @classmethod
    def from_cells(cls, cells: np.ndarray) -> "GridMap":
        """Build a map from a class array; start/goal inferred from classes 2/3."""
        cells = np.asarray(cells, dtype=np.uint8)
        h, w = cells.shape
        # Placeholder start/goal; __post_init__ re-derives them from the array.
        return cls(w, h, cells, CellIndex(0, 0), CellIndex(0, 0))

    @cached_property
    def obstacles(self) -> np.ndarray:
        """Boolean mask of obstacle cells, shape (height, width)."""
        mask = self.cells == CellClass.OBSTACLE
        mask.setflags(write=False)
        return mask

    def cell_class(self, idx: CellIndex) -> CellClass:
        return CellClass(int(self.cells[idx.y, idx.x]))

    def in_bounds(self, idx: CellIndex) -> bool:
        return 0 <= idx.x < self.width and 0 <= idx.y < self.height

    def free_cells(self) -> list[CellIndex]:
        """Cells of class FREE only (start/goal cells excluded)."""
        ys, xs = np.nonzero(self.cells == CellClass.FREE)
        return [CellIndex(int(x), int(y)) for x, y in zip(xs, ys)]

    def count(self, cls: CellClass) -> int:
        return int(np.count_nonzero(self.cells == cls))

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash((self.width, self.height, self.cells.tobytes()))


@dataclass(frozen=True)
class MapGenConfig:
    width: int = 200
    height: int = 200
    obstacle_count_range: tuple[int, int] = (8, 16)
    shape_set: frozenset = frozenset(SHAPE_NAMES)
    obstacle_size_range: tuple[float, float] = (15.0, 40.0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape_set", frozenset(self.shape_set))
        lo, hi = self.obstacle_count_range
        if lo < 0 or hi < lo:
            raise ValueError("obstacle_count_range must be nonempty with min >= 0")
        if not self.shape_set:
            raise ValueError("shape_set must be nonempty")
        unknown = self.shape_set - set(SHAPE_NAMES)
        if unknown:
            raise ValueError(f"unknown shapes: {sorted(unknown)}")
        if self.width < 8 or self.height < 8:
            raise ValueError("generated maps must be at least 8x8")
        slo, shi = self.obstacle_size_range
        if slo <= 0 or shi < slo:
            raise ValueError("obstacle_size_range must be a positive interval")


# ---------------------------------------------------------------------------
# Connectivity (8-connected; a diagonal step is blocked when BOTH cells
# orthogonally adjacent to it are obstacles, so paths cannot tunnel through
# diagonal obstacle seams).
# ---------------------------------------------------------------------------

_ORTHO_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_DIAG_STEPS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def grid_neighbors(obstacles: np.ndarray, x: int, y: int):
    """Yield (nx, ny, step_cost) of traversable neighbors of (x, y)."""
    h, w = obstacles.shape
    for dx, dy in _ORTHO_STEPS:
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and not obstacles[ny, nx]:
            yield nx, ny, 1.0
    for dx, dy in _DIAG_STEPS:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h) or obstacles[ny, nx]:
            continue
        if obstacles[y, nx] and obstacles[ny, x]:
            continue  # seam between two diagonal obstacles
        yield nx, ny, math.sqrt(2.0)


def flood_fill(obstacles: np.ndarray, seed: CellIndex,
               stop_at: CellIndex | None = None) -> np.ndarray:
    """Reachable mask from seed over non-obstacle cells.

    With stop_at given, the search exits as soon as that cell is reached
    (the returned mask is then partial).
    """
    h, w = obstacles.shape
    reached = np.zeros((h, w), dtype=bool)
    if obstacles[seed.y, seed.x]:
        return reached
    reached[seed.y, seed.x] = True
    queue = deque([(seed.x, seed.y)])
    while queue:
        x, y = queue.popleft()
        if stop_at is not None and x == stop_at.x and y == stop_at.y:
            return reached
        for nx, ny, _ in grid_neighbors(obstacles, x, y):
            if not reached[ny, nx]:
                reached[ny, nx] = True
                queue.append((nx, ny))
    return reached


def is_connected(map_or_obstacles, a: CellIndex, b: CellIndex) -> bool:
    obstacles = getattr(map_or_obstacles, "obstacles", map_or_obstacles)
    if obstacles[a.y, a.x] or obstacles[b.y, b.x]:
        return False
    return bool(flood_fill(obstacles, a, stop_at=b)[b.y, b.x])


# ---------------------------------------------------------------------------
# Obstacle shapes. Every shape decomposes into convex polygons (plus the
# circle), rasterized by testing pixel centers.
# ---------------------------------------------------------------------------


def _rotate(points: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return points @ rot.T


def _fill_convex_polygon(grid: np.ndarray, vertices: np.ndarray):
    """Set obstacle cells whose centers fall inside a convex polygon."""
    h, w = grid.shape
    x0 = max(int(math.floor(vertices[:, 0].min())), 0)
    x1 = min(int(math.ceil(vertices[:, 0].max())), w - 1)
    y0 = max(int(math.floor(vertices[:, 1].min())), 0)
    y1 = min(int(math.ceil(vertices[:, 1].max())), h - 1)
    if x0 > x1 or y0 > y1:
        return
    xs = np.arange(x0, x1 + 1) + 0.5
    ys = np.arange(y0, y1 + 1) + 0.5
    px, py = np.meshgrid(xs, ys)
    inside = np.ones(px.shape, dtype=bool)
    n = len(vertices)
    # Signed area fixes the winding so the half-plane test is orientation-free.
    area = 0.0
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        area += ax * by - bx * ay
    sign = 1.0 if area >= 0 else -1.0
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        inside &= sign * cross >= 0
    grid[y0:y1 + 1, x0:x1 + 1] |= inside


def _fill_circle(grid: np.ndarray, cx: float, cy: float, radius: float):
    h, w = grid.shape
    x0 = max(int(math.floor(cx - radius)), 0)
    x1 = min(int(math.ceil(cx + radius)), w - 1)
    y0 = max(int(math.floor(cy - radius)), 0)
    y1 = min(int(math.ceil(cy + radius)), h - 1)
    if x0 > x1 or y0 > y1:
        return
    xs = np.arange(x0, x1 + 1) + 0.5
    ys = np.arange(y0, y1 + 1) + 0.5
    px, py = np.meshgrid(xs, ys)
    grid[y0:y1 + 1, x0:x1 + 1] |= (px - cx) ** 2 + (py - cy) ** 2 <= radius ** 2


def _bar_vertices(length: float, thickness: float) -> np.ndarray:
    hl, ht = length / 2.0, thickness / 2.0
    return np.array([[-hl, -ht], [hl, -ht], [hl, ht], [-hl, ht]])


def _stamp_shape(grid: np.ndarray, shape: str, rng: np.random.Generator,
                 size: float, cx: float, cy: float, theta: float):
    center = np.array([cx, cy])
    if shape == "circle":
        _fill_circle(grid, cx, cy, size / 2.0)
    elif shape == "square":
        half = size / 2.0
        verts = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
        _fill_convex_polygon(grid, _rotate(verts, theta) + center)
    elif shape == "bar":
        aspect = rng.uniform(4.0, 6.0)
        thickness = max(1.0, size / aspect)
        _fill_convex_polygon(grid, _rotate(_bar_vertices(size, thickness), theta) + center)
    elif shape == "triangle":
        half = size / 2.0
        for _ in range(16):
            verts = rng.uniform(-half, half, size=(3, 2))
            area = 0.5 * abs(
                (verts[1, 0] - verts[0, 0]) * (verts[2, 1] - verts[0, 1])
                - (verts[2, 0] - verts[0, 0]) * (verts[1, 1] - verts[0, 1]))
            if area >= size * size / 10.0:  # reject slivers that rasterize to nothing
                break
        _fill_convex_polygon(grid, _rotate(verts, theta) + center)
    elif shape == "u_shape":
        thickness = max(1.0, size / 4.0)
        half = size / 2.0
        off = half - thickness / 2.0
        parts = [
            (_bar_vertices(size, thickness), np.array([0.0, -off])),          # base
            (_bar_vertices(thickness, size), np.array([-off, 0.0])),          # left arm
            (_bar_vertices(thickness, size), np.array([off, 0.0])),           # right arm
        ]
        for verts, local_off in parts:
            _fill_convex_polygon(grid, _rotate(verts + local_off, theta) + center)
    else:
        raise ValueError(f"unknown shape {shape!r}")


def _rasterize_obstacles(cfg: MapGenConfig, rng: np.random.Generator) -> np.ndarray:
    grid = np.zeros((cfg.height, cfg.width), dtype=bool)
    lo, hi = cfg.obstacle_count_range
    count = int(rng.integers(lo, hi + 1))
    shapes = sorted(cfg.shape_set)
    for _ in range(count):
        shape = shapes[int(rng.integers(len(shapes)))]
        size = rng.uniform(*cfg.obstacle_size_range)
        cx = rng.uniform(0.0, cfg.width)
        cy = rng.uniform(0.0, cfg.height)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        _stamp_shape(grid, shape, rng, size, cx, cy, theta)
    return grid


def _sample_distinct_free(free_xy: np.ndarray, n: int, rng: np.random.Generator):
    picks = rng.choice(len(free_xy), size=n, replace=False)
    return [CellIndex(int(free_xy[i][0]), int(free_xy[i][1])) for i in picks]


def generate_map(cfg: MapGenConfig) -> GridMap:
    """Generate a random map; start-goal connectivity is guaranteed.

    Pure function of cfg (including seed). On repeated connectivity failures
    the start/goal pair is resampled first, then the obstacle layout itself;
    after GENERATION_RETRY_LIMIT failed draws GenerationFailed is raised.
    """
    rng = np.random.default_rng(cfg.seed)
    obstacles = None
    for attempt in range(GENERATION_RETRY_LIMIT):
        if obstacles is None or attempt % OBSTACLE_REGEN_PERIOD == 0 and attempt > 0:
            obstacles = _rasterize_obstacles(cfg, rng)
            ys, xs = np.nonzero(~obstacles)
            free_xy = np.stack([xs, ys], axis=1)
        if len(free_xy) < 2:
            obstacles = None
            continue
        start, goal = _sample_distinct_free(free_xy, 2, rng)
        if is_connected(obstacles, start, goal):
            cells = obstacles.astype(np.uint8)
            cells[start.y, start.x] = CellClass.START
            cells[goal.y, goal.x] = CellClass.GOAL
            return GridMap(cfg.width, cfg.height, cells, start, goal)
    raise GenerationFailed(
        f"no connected start/goal found in {GENERATION_RETRY_LIMIT} attempts; "
        "obstacle configuration is likely too dense")


def sample_start_goal_pairs(grid: GridMap, n_starts: int, n_goals: int,
                            seed: int) -> list[tuple[CellIndex, CellIndex]]:
    """Cross product of distinct free start/goal cells, all mutually A*-connected.

    Cells landing outside the component of the first draw are resampled; if
    no component can host the full set, InsufficientFreeSpace is raised.
    """
    needed = n_starts + n_goals
    free = grid.free_cells()
    if len(free) < needed:
        raise InsufficientFreeSpace(
            f"need {needed} free cells, map has {len(free)}")
    rng = np.random.default_rng(seed)
    free_xy = np.array(free, dtype=int)

    cells = _sample_distinct_free(free_xy, needed, rng)
    for _ in range(GENERATION_RETRY_LIMIT):
        reach = flood_fill(grid.obstacles, cells[0])
        inside = [c for c in cells if reach[c.y, c.x]]
        if len(inside) == needed:
            starts, goals = cells[:n_starts], cells[n_starts:]
            return [(s, g) for s in starts for g in goals]
        # Resample from whichever side of the split is larger: keep the
        # in-component cells if they form the majority, else redraw around
        # a fresh anchor.
        if len(inside) * 2 >= needed:
            candidates = free_xy[reach[free_xy[:, 1], free_xy[:, 0]]]
            taken = {tuple(c) for c in inside}
            pool = np.array([c for c in candidates if tuple(c) not in taken], dtype=int)
            if len(pool) >= needed - len(inside):
                refill = _sample_distinct_free(pool, needed - len(inside), rng)
                cells = inside + refill
                continue
        cells = _sample_distinct_free(free_xy, needed, rng)
    raise InsufficientFreeSpace(
        f"no connected free region with {needed} cells found")


# ---------------------------------------------------------------------------
# VMAP1 format: "VMAP1" magic line, "<width> <height>" line, then height rows
# of width digit characters (0..3), LF line endings, row 0 = top.
# ---------------------------------------------------------------------------


def write_map(grid: GridMap) -> bytes:
    rows = ["".join(str(int(v)) for v in row) for row in grid.cells]
    return (f"{MAP_MAGIC}\n{grid.width} {grid.height}\n" + "\n".join(rows) + "\n").encode("ascii")


def read_map(data: bytes) -> GridMap:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(f"map file is not ASCII: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing LF
    if not lines or lines[0] != MAP_MAGIC:
        raise ParseError(f"bad magic, expected {MAP_MAGIC!r}", line=1)
    if len(lines) < 2:
        raise ParseError("missing dimension line", line=2)
    parts = lines[1].split()
    if len(parts) != 2:
        raise ParseError("dimension line must be '<width> <height>'", line=2)
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError("dimensions must be decimal integers", line=2) from None
    if width < 1 or height < 1:
        raise ParseError("dimensions must be positive", line=2)
    if len(lines) - 2 != height:
        raise ParseError(f"expected {height} rows, found {len(lines) - 2}",
                         line=len(lines))
    cells = np.zeros((height, width), dtype=np.uint8)
    for y, row in enumerate(lines[2:]):
        if len(row) != width:
            raise ParseError(f"row has {len(row)} cells, expected {width}",
                             line=3 + y, column=min(len(row), width) + 1)
        for x, ch in enumerate(row):
            if ch not in "0123":
                raise ParseError(f"invalid cell character {ch!r}",
                                 line=3 + y, column=x + 1)
            cells[y, x] = int(ch)
    n_start = int(np.count_nonzero(cells == CellClass.START))
    n_goal = int(np.count_nonzero(cells == CellClass.GOAL))
    if n_start != 1 or n_goal != 1:
        raise ParseError(
            f"map must contain exactly one '2' and one '3' (found {n_start} and {n_goal})",
            line=3)
    return GridMap.from_cells(cells)


def save_map(grid: GridMap, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_map(grid))


def load_map(path) -> GridMap:
    with open(path, "rb") as fh:
        return read_map(fh.read())
