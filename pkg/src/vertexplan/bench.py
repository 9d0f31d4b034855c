"""Benchmark harness: multi-trial, multi-algorithm planning comparisons.

Per-trial seeds are stable hashes of (base seed, map id, algorithm, trial),
so extending a benchmark never perturbs existing trials. Guidance maps are
resolved once per (map, algorithm) and shared across that pair's trials.
Trials are independent jobs; with jobs > 1 they run in a process pool and
results are sorted before any aggregation, keeping output order-independent
of scheduling.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .errors import EmptyInput, GuidanceFileMissing, VertexPlanError
from .gridmap import GridMap
from .guidance import DEFAULT_SIGMA, GuidanceMap, MaskThreshold, load_guidance, oracle_guidance
from .oracle import astar
from .planner import PlannerConfig, Termination, masked_guidance, plan
from .seeding import stable_seed

ALGORITHM_NAMES = ("rrt_star", "nrrt_star", "vnrrt_star", "m_vnrrt_star")

RAW_COLUMNS = ("map_id", "algorithm", "tau", "trial", "seed", "status",
               "path_length", "time_s", "iterations", "iters_to_first")
SUMMARY_COLUMNS = ("algorithm", "map_set", "metric", "mean", "std", "n",
                   "improvement_vs_rrtstar_pct")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    tau: MaskThreshold | None = None
    guidance_source: str | None = None  # "oracle_path" | "oracle_vertex" | "file:<path>"

    def __post_init__(self):
        if self.name not in ALGORITHM_NAMES:
            raise ValueError(f"unknown algorithm {self.name!r}")
        if (self.tau is not None) != (self.name == "m_vnrrt_star"):
            raise ValueError("tau is required for m_vnrrt_star and forbidden otherwise")
        if self.name == "rrt_star":
            if self.guidance_source is not None:
                raise ValueError("rrt_star takes no guidance source")
        else:
            source = self.guidance_source or self.default_source(self.name)
            object.__setattr__(self, "guidance_source", source)
            if not (source in ("oracle_path", "oracle_vertex") or source.startswith("file:")):
                raise ValueError(f"bad guidance source {source!r}")

    @staticmethod
    def default_source(name: str) -> str:
        return "oracle_path" if name == "nrrt_star" else "oracle_vertex"

    @property
    def label(self) -> str:
        if self.tau is not None:
            return f"{self.name}_tau{self.tau.tau:g}"
        return self.name


@dataclass(frozen=True)
class TrialRecord:
    map_id: str
    algorithm: str
    tau: float | None
    trial: int
    seed: int
    status: str
    path_length: float | None
    time_s: float
    iterations: int
    iters_to_first: int | None


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    map_set: str
    metric: str
    mean: float
    std: float | None
    n: int
    improvement_vs_rrtstar_pct: float | None = None


def resolve_guidance(grid: GridMap, spec: AlgorithmSpec,
                     sigma: float = DEFAULT_SIGMA) -> GuidanceMap | None:
    """Guidance raster an algorithm plans with on this map (None for rrt_star).

    Masking for m_vnrrt_star happens here, with the fall-back-to-unmasked
    policy when the threshold would remove all mass.
    """
    if spec.name == "rrt_star":
        return None
    source = spec.guidance_source
    if source == "oracle_path":
        g = oracle_guidance(grid, mode="path", sigma=sigma)
    elif source == "oracle_vertex":
        g = oracle_guidance(grid, mode="vertex", sigma=sigma)
    else:
        path = source[len("file:"):]
        if not os.path.exists(path):
            raise GuidanceFileMissing(path)
        g = load_guidance(path)
    return masked_guidance(g, spec.tau)


def _run_trial(args):
    grid, guidance, spec, map_id, trial, seed, base_config, termination = args
    config = replace(base_config, seed=seed, termination=termination,
                     guided_mix=0.0 if guidance is None else base_config.guided_mix)
    try:
        res = plan(grid, config, guidance=guidance)
        return TrialRecord(
            map_id=map_id, algorithm=spec.label,
            tau=spec.tau.tau if spec.tau else None,
            trial=trial, seed=seed, status=res.status,
            path_length=res.best_cost if res.status == "Solved" else None,
            time_s=res.wall_time, iterations=res.iterations_used,
            iters_to_first=res.iterations_to_first_solution)
    except VertexPlanError as exc:
        return TrialRecord(map_id=map_id, algorithm=spec.label,
                           tau=spec.tau.tau if spec.tau else None,
                           trial=trial, seed=seed,
                           status=f"Error({type(exc).__name__})",
                           path_length=None, time_s=0.0, iterations=0,
                           iters_to_first=None)


def run_benchmark(maps: dict[str, GridMap], algorithms: list[AlgorithmSpec],
                  trials: int, termination: str = "initial",
                  epsilon: float = 0.02, base_seed: int = 0,
                  base_config: PlannerConfig | None = None,
                  sigma: float = DEFAULT_SIGMA, jobs: int = 1) -> list[TrialRecord]:
    """Run trials-per-(map, algorithm) planning runs and record each outcome.

    For optimal termination the per-map reference cost is the A* octile cost.
    Guidance resolution failures mark that pair's trials as errors instead of
    aborting the benchmark, except a missing guidance file, which is a usage
    error and raises.
    """
    base_config = base_config or PlannerConfig()
    terminations = {}
    for map_id, grid in maps.items():
        if termination == "optimal":
            ref = astar(grid, grid.start, grid.goal).cost
            terminations[map_id] = Termination("optimal", epsilon=epsilon,
                                               reference_cost=ref)
        else:
            terminations[map_id] = Termination("initial")

    tasks = []
    for map_id in sorted(maps):
        grid = maps[map_id]
        for spec in algorithms:
            try:
                guidance = resolve_guidance(grid, spec, sigma=sigma)
            except GuidanceFileMissing:
                raise
            except VertexPlanError as exc:
                for trial in range(trials):
                    seed = stable_seed(base_seed, map_id, spec.label, trial)
                    tasks.append(TrialRecord(
                        map_id=map_id, algorithm=spec.label,
                        tau=spec.tau.tau if spec.tau else None,
                        trial=trial, seed=seed,
                        status=f"Error({type(exc).__name__})",
                        path_length=None, time_s=0.0, iterations=0,
                        iters_to_first=None))
                continue
            for trial in range(trials):
                seed = stable_seed(base_seed, map_id, spec.label, trial)
                tasks.append((grid, guidance, spec, map_id, trial, seed,
                              base_config, terminations[map_id]))

    jobs = max(1, jobs)
    pending = [t for t in tasks if isinstance(t, tuple)]
    finished = [t for t in tasks if isinstance(t, TrialRecord)]
    if jobs == 1:
        finished.extend(_run_trial(t) for t in pending)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            finished.extend(pool.map(_run_trial, pending, chunksize=4))
    finished.sort(key=lambda r: (r.map_id, r.algorithm, r.trial))
    return finished


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def _mean_std(values):
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, None, n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var), n


def summarize(records: list[TrialRecord],
              map_sets: dict[str, str] | None = None) -> list[SummaryRow]:
    """Mean/std per (algorithm, map set, metric), plus percentage improvement
    over rrt_star for the time and iteration metrics: 100*(t_base - t)/t.

    path_length aggregates solved trials only; a success_rate metric reports
    the solved fraction. The improvement column stays empty unless an
    rrt_star baseline and at least one other algorithm are present.
    """
    if not records:
        raise EmptyInput("no trial records to summarize")
    map_sets = map_sets or {}
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        key = (r.algorithm, map_sets.get(r.map_id, "all"))
        groups.setdefault(key, []).append(r)

    algorithms = sorted({k[0] for k in groups})
    compare = "rrt_star" in algorithms and len(algorithms) > 1

    rows = []
    means: dict[tuple, float] = {}
    for (alg, mset), recs in sorted(groups.items()):
        solved = [r for r in recs if r.status == "Solved"]
        metric_values = {
            "path_length": [r.path_length for r in solved],
            "time_cost": [r.time_s for r in recs],
            "iterations": [float(r.iterations) for r in recs],
            "success_rate": [1.0 if r.status == "Solved" else 0.0 for r in recs],
        }
        for metric, values in metric_values.items():
            if not values:
                continue
            mean, std, n = _mean_std(values)
            means[(alg, mset, metric)] = mean
            rows.append(SummaryRow(alg, mset, metric, mean, std, n))

    out = []
    for row in rows:
        imp = None
        if compare and row.metric in ("time_cost", "iterations"):
            base = means.get(("rrt_star", row.map_set, row.metric))
            if base is not None and row.mean > 0:
                imp = 100.0 * (base - row.mean) / row.mean
        out.append(replace(row, improvement_vs_rrtstar_pct=imp))
    return out


# ---------------------------------------------------------------------------
# CSV round-trip helpers
# ---------------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: list[TrialRecord], include_timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RAW_COLUMNS)
    for r in records:
        w.writerow([r.map_id, r.algorithm, _fmt(r.tau), r.trial, r.seed, r.status,
                    _fmt(r.path_length), _fmt(r.time_s) if include_timing else "",
                    r.iterations, _fmt(r.iters_to_first)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != RAW_COLUMNS:
        raise EmptyInput("not a raw benchmark CSV")
    out = []
    for row in rows[1:]:
        out.append(TrialRecord(
            map_id=row[0], algorithm=row[1],
            tau=float(row[2]) if row[2] else None,
            trial=int(row[3]), seed=int(row[4]), status=row[5],
            path_length=float(row[6]) if row[6] else None,
            time_s=float(row[7]) if row[7] else 0.0,
            iterations=int(row[8]),
            iters_to_first=int(row[9]) if row[9] else None))
    return out


def summary_to_csv(rows: list[SummaryRow]) -> str:
    has_improvement = any(r.improvement_vs_rrtstar_pct is not None for r in rows)
    columns = SUMMARY_COLUMNS if has_improvement else SUMMARY_COLUMNS[:-1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        row = [r.algorithm, r.map_set, r.metric, _fmt(r.mean), _fmt(r.std), r.n]
        if has_improvement:
            row.append(_fmt(r.improvement_vs_rrtstar_pct))
        w.writerow(row)
    return buf.getvalue()


def summary_from_csv(text: str) -> list[SummaryRow]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) not in (SUMMARY_COLUMNS, SUMMARY_COLUMNS[:-1]):
        raise EmptyInput("not a summary CSV")
    has_improvement = len(rows[0]) == len(SUMMARY_COLUMNS)
    out = []
    for row in rows[1:]:
        out.append(SummaryRow(
            algorithm=row[0], map_set=row[1], metric=row[2],
            mean=float(row[3]), std=float(row[4]) if row[4] else None,
            n=int(row[5]),
            improvement_vs_rrtstar_pct=(float(row[6]) if has_improvement and row[6]
                                        else None)))
    return out
