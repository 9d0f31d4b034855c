"""Optimal grid paths via A*, and extraction of turning points from them.

Step costs are 1 for orthogonal moves and sqrt(2) for diagonal moves. To make
path costs exactly reproducible, cost-to-come is tracked as an integer pair
(orthogonal steps, diagonal steps) and only converted to float once per node;
distinct step-count pairs are separated by far more than float rounding error,
so cost comparisons are exact in practice.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import NoPath
from .gridmap import CellIndex, GridMap, _DIAG_STEPS, _ORTHO_STEPS

SQRT2 = math.sqrt(2.0)

# Scales (in path steps) at which a direction change must be present for a
# point to count as a turning point.
VERTEX_SCALES = (1, 2, 3)

# Cost-to-come improvements smaller than this are treated as ties.
COST_EPS = 1e-9


@dataclass(frozen=True)
class GridPath:
    cells: tuple  # CellIndex sequence, start first
    cost: float   # sum of per-step costs (1 / sqrt(2))

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class VertexSet:
    vertices: tuple  # order-preserving subsequence of the path cells


def _pair_cost(n_orth: int, n_diag: int) -> float:
    return float(n_orth) + float(n_diag) * SQRT2


def octile_distance(a: CellIndex, b: CellIndex) -> float:
    dx = abs(a.x - b.x)
    dy = abs(a.y - b.y)
    lo = min(dx, dy)
    return _pair_cost(dx + dy - 2 * lo, lo)


def astar(grid: GridMap, start: CellIndex, goal: CellIndex) -> GridPath:
    """Minimum-cost 8-connected path under octile step costs.

    Ties on f prefer larger g (deeper nodes), then smaller (y, x), which makes
    the expansion order and the returned path deterministic.
    """
    obstacles = grid.obstacles
    for name, cell in (("start", start), ("goal", goal)):
        if not grid.in_bounds(cell):
            raise ValueError(f"{name} {cell} outside {grid.width}x{grid.height} map")
        if obstacles[cell.y, cell.x]:
            raise ValueError(f"{name} {cell} lies inside an obstacle")
    if start == goal:
        return GridPath(cells=(start,), cost=0.0)

    h, w = obstacles.shape
    best: dict[tuple, tuple] = {(start.x, start.y): (0, 0, 0.0)}
    parent: dict[tuple, tuple] = {}
    heap = [(octile_distance(start, goal), -0.0, start.y, start.x)]
    gx, gy = goal.x, goal.y

    while heap:
        f, neg_g, y, x = heapq.heappop(heap)
        no, nd, g = best[(x, y)]
        if -neg_g > g + COST_EPS:
            continue  # stale entry superseded by a cheaper relaxation
        if x == gx and y == gy:
            cells = [CellIndex(x, y)]
            while (x, y) in parent:
                x, y = parent[(x, y)]
                cells.append(CellIndex(x, y))
            cells.reverse()
            return GridPath(cells=tuple(cells), cost=g)
        for dx, dy in _ORTHO_STEPS:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or obstacles[ny, nx]:
                continue
            _relax(best, parent, heap, x, y, nx, ny, no + 1, nd, goal)
        for dx, dy in _DIAG_STEPS:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or obstacles[ny, nx]:
                continue
            if obstacles[y, nx] and obstacles[ny, x]:
                continue  # diagonal seam between two obstacles
            _relax(best, parent, heap, x, y, nx, ny, no, nd + 1, goal)
    raise NoPath(f"goal {goal} unreachable from {start}")


def _relax(best, parent, heap, x, y, nx, ny, no, nd, goal):
    g = _pair_cost(no, nd)
    known = best.get((nx, ny))
    if known is not None and g >= known[2] - COST_EPS:
        return
    best[(nx, ny)] = (no, nd, g)
    parent[(nx, ny)] = (x, y)
    f = g + octile_distance(CellIndex(nx, ny), goal)
    heapq.heappush(heap, (f, -g, ny, nx))


def extract_vertices(path: GridPath) -> VertexSet:
    """Turning points of a path: endpoints plus every interior point whose
    direction changes at all of step sizes 1, 2 and 3.

    At scale k the backward chord x_i - x_{i-k} is compared with the forward
    chord x_{i+k} - x_i; pointing the same way (zero cross product, positive
    dot product) means no change at that scale. A scale whose chord would
    reach past an endpoint cannot attest a turn, so points within 3 steps of
    an endpoint are never interior vertices; this keeps staircase patterns
    near the ends of straight lines unclassified, as intended.
    """
    pts = path.cells
    last = len(pts) - 1
    if last < 1:
        return VertexSet(vertices=tuple(pts))
    vertices = [pts[0]]
    for i in range(1, last):
        turning = True
        for k in VERTEX_SCALES:
            if i - k < 0 or i + k > last:
                turning = False
                break
            bx = pts[i].x - pts[i - k].x
            by = pts[i].y - pts[i - k].y
            fx = pts[i + k].x - pts[i].x
            fy = pts[i + k].y - pts[i].y
            cross = bx * fy - by * fx
            dot = bx * fx + by * fy
            if cross == 0 and dot > 0:
                turning = False
                break
        if turning:
            vertices.append(pts[i])
    vertices.append(pts[last])
    return VertexSet(vertices=tuple(vertices))
