"""RRT* and its guided variants.

The tree lives in the continuous map frame: pixel (i, j) spans the unit
square [i, i+1) x [j, j+1), so a w x h map covers [0, w] x [0, h]. Collision
checking is exact supercover: a segment is free iff every pixel whose closed
unit square it touches is non-obstacle.

A single planning run owns its tree and RNG; maps and guidance rasters are
immutable shared inputs, so runs can execute in parallel without locking.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import AllMasked, InvalidConfig, NotSamplable, NoValidParent
from .gridmap import GridMap
from .guidance import GuidanceMap, MaskThreshold, apply_mask, sample_point

logger = logging.getLogger(__name__)

# Strictly-better margin for cost comparisons; prevents oscillating
# re-parenting among floating-point ties.
REWIRE_EPS = 1e-9

Point = tuple[float, float]


@dataclass(frozen=True)
class Termination:
    """Stop policy: 'initial' stops at the first solution; 'optimal' stops
    once best cost reaches (1 + epsilon) * reference_cost."""

    kind: str = "initial"
    epsilon: float = 0.02
    reference_cost: float | None = None

    def __post_init__(self):
        if self.kind not in ("initial", "optimal"):
            raise InvalidConfig(f"unknown termination kind {self.kind!r}")
        if self.epsilon < 0:
            raise InvalidConfig("epsilon must be >= 0")
        if self.kind == "optimal":
            if self.reference_cost is None or self.reference_cost <= 0:
                raise InvalidConfig("optimal termination needs a positive reference_cost")

    @property
    def target_cost(self) -> float | None:
        if self.kind != "optimal":
            return None
        return (1.0 + self.epsilon) * self.reference_cost


@dataclass(frozen=True)
class PlannerConfig:
    steer_step: float = 10.0      # eta, pixels
    goal_radius: float = 5.0      # delta, pixels
    max_iterations: int = 100_000
    rewire_gamma: float = 200.0   # pixels; keeps the rewire radius useful on 200x200 maps
    guided_mix: float = 0.5       # probability of drawing from the guidance map
    termination: Termination = field(default_factory=Termination)
    seed: int = 0

    def __post_init__(self):
        if self.steer_step <= 0:
            raise InvalidConfig("steer_step must be > 0")
        if self.goal_radius <= 0:
            raise InvalidConfig("goal_radius must be > 0")
        if not (0.0 <= self.guided_mix <= 1.0):
            raise InvalidConfig("guided_mix must lie in [0, 1]")
        if self.max_iterations < 1:
            raise InvalidConfig("max_iterations must be >= 1")
        if self.rewire_gamma < 0:
            raise InvalidConfig("rewire_gamma must be >= 0")


@dataclass
class PlanResult:
    status: str  # "Solved" | "IterationBudgetExhausted"
    best_path: list[Point] | None
    best_cost: float | None
    iterations_used: int
    iterations_to_first_solution: int | None
    wall_time: float

    def to_json_dict(self, include_timing: bool = True) -> dict:
        out = {
            "status": self.status,
            "best_cost": self.best_cost,
            "iterations_used": self.iterations_used,
            "iterations_to_first_solution": self.iterations_to_first_solution,
            "path": [[x, y] for x, y in self.best_path] if self.best_path else None,
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time
        return out


class Tree:
    """RRT* search tree over preallocated arrays.

    Stored cost is cost-to-come (root distance along parent links); reparent
    keeps every descendant's cost consistent.
    """

    def __init__(self, root: Point, capacity: int = 1024):
        self._pts = np.empty((capacity, 2), dtype=np.float64)
        self._cost = np.empty(capacity, dtype=np.float64)
        self._parent = np.empty(capacity, dtype=np.int64)
        self._children: list[list[int]] = [[]]
        self._pts[0] = root
        self._cost[0] = 0.0
        self._parent[0] = -1
        self.size = 1

    @property
    def root(self) -> int:
        return 0

    def point(self, i: int) -> Point:
        return (float(self._pts[i, 0]), float(self._pts[i, 1]))

    def cost(self, i: int) -> float:
        return float(self._cost[i])

    def parent(self, i: int) -> int | None:
        p = int(self._parent[i])
        return None if p < 0 else p

    def points_view(self) -> np.ndarray:
        return self._pts[: self.size]

    def costs_view(self) -> np.ndarray:
        return self._cost[: self.size]

    def _grow(self):
        cap = len(self._cost) * 2
        self._pts = np.resize(self._pts, (cap, 2))
        self._cost = np.resize(self._cost, cap)
        self._parent = np.resize(self._parent, cap)

    def add(self, point: Point, parent: int, cost: float) -> int:
        if self.size == len(self._cost):
            self._grow()
        i = self.size
        self._pts[i] = point
        self._cost[i] = cost
        self._parent[i] = parent
        self._children.append([])
        self._children[parent].append(i)
        self.size += 1
        return i

    def reparent(self, i: int, new_parent: int, new_cost: float):
        delta = new_cost - float(self._cost[i])
        old = int(self._parent[i])
        self._children[old].remove(i)
        self._children[new_parent].append(i)
        self._parent[i] = new_parent
        stack = [i]
        while stack:
            j = stack.pop()
            self._cost[j] += delta
            stack.extend(self._children[j])

    def recompute_costs(self) -> np.ndarray:
        """Costs re-derived from scratch by walking the tree (test oracle aid)."""
        out = np.empty(self.size, dtype=np.float64)
        out[0] = 0.0
        stack = list(self._children[0])
        while stack:
            j = stack.pop()
            p = int(self._parent[j])
            out[j] = out[p] + math.dist(self.point(p), self.point(j))
            stack.extend(self._children[j])
        return out


# ---------------------------------------------------------------------------
# Geometric primitives
# ---------------------------------------------------------------------------


def steer(from_pt: Point, to_pt: Point, eta: float) -> Point:
    """Move from from_pt toward to_pt, at most eta pixels."""
    if eta <= 0:
        raise InvalidConfig("steer step must be > 0")
    dx = to_pt[0] - from_pt[0]
    dy = to_pt[1] - from_pt[1]
    d = math.hypot(dx, dy)
    if d <= eta:
        return to_pt
    scale = eta / d
    return (from_pt[0] + dx * scale, from_pt[1] + dy * scale)


def nearest(tree: Tree, q: Point) -> int:
    """Index of the tree node closest to q; ties go to the smallest id."""
    pts = tree.points_view()
    d2 = (pts[:, 0] - q[0]) ** 2 + (pts[:, 1] - q[1]) ** 2
    return int(np.argmin(d2))


def obstacle_free(grid: GridMap, a: Point, b: Point) -> bool:
    """True iff no obstacle pixel's closed unit square touches segment [a, b]."""
    w, h = grid.width, grid.height
    for pt in (a, b):
        if not (0.0 <= pt[0] <= w and 0.0 <= pt[1] <= h):
            raise ValueError(f"point {pt} outside map rectangle [0,{w}]x[0,{h}]")
    ax, ay = a
    bx, by = b
    x0 = max(0, int(math.ceil(min(ax, bx))) - 1)
    x1 = min(w - 1, int(math.floor(max(ax, bx))))
    y0 = max(0, int(math.ceil(min(ay, by))) - 1)
    y1 = min(h - 1, int(math.floor(max(ay, by))))
    if x0 > x1 or y0 > y1:
        return True
    box = grid.obstacles[y0:y1 + 1, x0:x1 + 1]
    if not box.any():
        return True
    oy, ox = np.nonzero(box)
    cx = (ox + x0).astype(np.float64)  # cell corners; squares are [cx, cx+1]
    cy = (oy + y0).astype(np.float64)

    dx = bx - ax
    dy = by - ay
    inf = np.inf
    if dx != 0.0:
        t0 = (cx - ax) / dx
        t1 = (cx + 1.0 - ax) / dx
        txmin = np.minimum(t0, t1)
        txmax = np.maximum(t0, t1)
    else:
        inside = (cx <= ax) & (ax <= cx + 1.0)
        txmin = np.where(inside, -inf, inf)
        txmax = np.where(inside, inf, -inf)
    if dy != 0.0:
        t0 = (cy - ay) / dy
        t1 = (cy + 1.0 - ay) / dy
        tymin = np.minimum(t0, t1)
        tymax = np.maximum(t0, t1)
    else:
        inside = (cy <= ay) & (ay <= cy + 1.0)
        tymin = np.where(inside, -inf, inf)
        tymax = np.where(inside, inf, -inf)
    tmin = np.maximum(np.maximum(txmin, tymin), 0.0)
    tmax = np.minimum(np.minimum(txmax, tymax), 1.0)
    return not bool(np.any(tmin <= tmax))


def extend_and_rewire(tree: Tree, grid: GridMap, x_new: Point, radius: float) -> int:
    """Attach x_new to its best parent, then pull cheaper neighbors under it.

    The parent is the cost-minimizing collision-free node among the radius
    neighborhood plus the nearest node. Each neighbor whose cost-to-come
    would strictly drop (> REWIRE_EPS) through x_new, with a collision-free
    connection, is re-parented; descendant costs follow.
    """
    pts = tree.points_view()
    d2 = (pts[:, 0] - x_new[0]) ** 2 + (pts[:, 1] - x_new[1]) ** 2
    dist = np.sqrt(d2)
    nearest_id = int(np.argmin(d2))
    neighbor_ids = np.flatnonzero(d2 <= radius * radius)

    candidates = neighbor_ids
    if nearest_id not in neighbor_ids:
        candidates = np.append(neighbor_ids, nearest_id)
    through = tree.costs_view()[candidates] + dist[candidates]
    order = np.argsort(through, kind="stable")

    parent = -1
    for k in order:
        cand = int(candidates[k])
        if obstacle_free(grid, tree.point(cand), x_new):
            parent = cand
            new_cost = float(through[k])
            break
    if parent < 0:
        raise NoValidParent(f"no collision-free connection to {x_new}")

    new_id = tree.add(x_new, parent, new_cost)
    for j in neighbor_ids:
        j = int(j)
        if j == parent:
            continue
        cand_cost = new_cost + float(dist[j])
        if cand_cost < tree.cost(j) - REWIRE_EPS and obstacle_free(grid, x_new, tree.point(j)):
            tree.reparent(j, new_id, cand_cost)
    return new_id


def rewire_radius(gamma: float, eta: float, n: int) -> float:
    if n <= 1:
        return 0.0
    return min(gamma * math.sqrt(math.log(n) / n), eta)


def masked_guidance(g: GuidanceMap, tau: MaskThreshold | None) -> GuidanceMap:
    """Mask g at tau; if nothing survives, warn and fall back to unmasked."""
    if tau is None:
        return g
    try:
        return apply_mask(g, tau)
    except AllMasked:
        logger.warning("masking at tau=%.3g removed all probability mass; "
                       "falling back to the unmasked guidance map", tau.tau)
        return g


def plan(grid: GridMap, config: PlannerConfig,
         guidance: GuidanceMap | None = None,
         trace: list | None = None) -> PlanResult:
    """Run (guided) RRT* from the map's start cell to its goal cell.

    Each iteration samples from the guidance raster with probability
    guided_mix, else uniformly over the map rectangle; then Nearest, Steer,
    an obstacle gate on the nearest->new segment, and extend_and_rewire with
    radius min(gamma*sqrt(log n / n), eta). A new node within goal_radius of
    the goal that connects collision-free registers a solution; the goal
    becomes a tree node and its cost only ever decreases.

    trace, when given, receives (iteration, best_cost) on every improvement.
    """
    if config.guided_mix > 0.0:
        if guidance is None:
            raise NotSamplable("guided_mix > 0 requires a guidance map")
        if guidance.total_mass <= 0.0:
            raise NotSamplable("guidance map has no positive probability mass")
        if (guidance.width, guidance.height) != (grid.width, grid.height):
            raise InvalidConfig("guidance dimensions do not match the map")

    t_start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    x_init = (grid.start.x + 0.5, grid.start.y + 0.5)
    x_goal = (grid.goal.x + 0.5, grid.goal.y + 0.5)
    tree = Tree(x_init)
    goal_id: int | None = None
    first_iter: int | None = None
    best_seen = math.inf
    target = config.termination.target_cost
    iterations = 0

    for iteration in range(1, config.max_iterations + 1):
        iterations = iteration
        if rng.random() < config.guided_mix:
            sample = sample_point(guidance, rng)
        else:
            sample = (rng.random() * grid.width, rng.random() * grid.height)
        near_id = nearest(tree, sample)
        near_pt = tree.point(near_id)
        x_new = steer(near_pt, sample, config.steer_step)
        if not obstacle_free(grid, near_pt, x_new):
            continue
        radius = rewire_radius(config.rewire_gamma, config.steer_step, tree.size)
        new_id = extend_and_rewire(tree, grid, x_new, radius)

        gd = math.dist(x_new, x_goal)
        if gd <= config.goal_radius and (gd == 0.0 or obstacle_free(grid, x_new, x_goal)):
            cand = tree.cost(new_id) + gd
            if goal_id is None:
                goal_id = new_id if gd == 0.0 else tree.add(x_goal, new_id, cand)
                first_iter = iteration
            elif cand < tree.cost(goal_id) - REWIRE_EPS:
                tree.reparent(goal_id, new_id, cand)

        if goal_id is not None:
            cost_now = tree.cost(goal_id)
            if cost_now < best_seen:
                best_seen = cost_now
                if trace is not None:
                    trace.append((iteration, cost_now))
            if config.termination.kind == "initial":
                break
            if target is not None and cost_now <= target:
                break

    wall = time.perf_counter() - t_start
    if goal_id is None:
        return PlanResult("IterationBudgetExhausted", None, None,
                          iterations, None, wall)
    path = []
    node: int | None = goal_id
    while node is not None:
        path.append(tree.point(node))
        node = tree.parent(node)
    path.reverse()
    best_cost = tree.cost(goal_id)
    solved = (config.termination.kind == "initial"
              or (target is not None and best_cost <= target))
    status = "Solved" if solved else "IterationBudgetExhausted"
    return PlanResult(status, path, best_cost, iterations, first_iter, wall)
