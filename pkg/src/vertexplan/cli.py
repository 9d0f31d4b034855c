"""Command-line entry point.

Subcommands: gen-maps, plan, bench, extract-vertices, make-guidance,
export-dataset, summarize. Every randomized subcommand is fully determined
by --seed; --no-timing suppresses wall-clock fields so outputs are
byte-stable for golden-file comparisons.

Exit codes: 0 success, 1 domain errors (reported as "error: ..." on stderr),
2 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import bench as bench_mod
from . import dataset as dataset_mod
from .errors import VertexPlanError
from .gridmap import MapGenConfig, SHAPE_NAMES, generate_map, load_map, save_map
from .guidance import (
    DEFAULT_SIGMA,
    MaskThreshold,
    load_guidance,
    oracle_guidance,
    save_guidance,
)
from .oracle import astar, extract_vertices
from .planner import PlannerConfig, Termination, masked_guidance, plan
from .seeding import stable_seed

ALGO_ALIASES = {
    "rrt": "rrt_star", "rrt_star": "rrt_star",
    "nrrt": "nrrt_star", "nrrt_star": "nrrt_star",
    "vnrrt": "vnrrt_star", "vnrrt_star": "vnrrt_star",
    "mvnrrt": "m_vnrrt_star", "m_vnrrt_star": "m_vnrrt_star",
}


def _add_planner_flags(p):
    p.add_argument("--iterations", type=int, default=100_000,
                   help="iteration budget (default 100000)")
    p.add_argument("--eta", type=float, default=10.0, help="steer step in px")
    p.add_argument("--goal-radius", type=float, default=5.0)
    p.add_argument("--rewire-gamma", type=float, default=200.0)
    p.add_argument("--mix", type=float, default=0.5,
                   help="guided sampling probability for guided algorithms")
    p.add_argument("--termination", choices=("initial", "optimal"),
                   default="initial")
    p.add_argument("--epsilon", type=float, default=0.02,
                   help="optimal-termination tolerance over the A* reference")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vertexplan",
                                 description="Vertex-guided RRT* planning toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-maps", help="generate random maps as VMAP1 files")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--width", type=int, default=200)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--obstacles", type=int, nargs=2, default=(8, 16),
                   metavar=("MIN", "MAX"))
    p.add_argument("--shapes", default=",".join(SHAPE_NAMES),
                   help="comma-separated subset of " + ",".join(SHAPE_NAMES))
    p.add_argument("--size", type=float, nargs=2, default=(15.0, 40.0),
                   metavar=("MIN", "MAX"), help="obstacle size range in px")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("plan", help="run one planning query, JSON on stdout")
    p.add_argument("--map", required=True)
    p.add_argument("--algo", required=True, choices=sorted(ALGO_ALIASES))
    p.add_argument("--guidance", default=None,
                   help="oracle-path | oracle-vertex | file:<path> "
                        "(defaults per algorithm)")
    p.add_argument("--tau", type=float, default=None,
                   help="mask threshold (required for mvnrrt)")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--figure", default=None, help="optional PNG of the solution")
    _add_planner_flags(p)

    p = sub.add_parser("extract-vertices",
                       help="A* path and its turning points as JSON")
    p.add_argument("--map", required=True)

    p = sub.add_parser("make-guidance", help="write an oracle guidance raster")
    p.add_argument("--map", required=True)
    p.add_argument("--mode", choices=("path", "vertex"), default="vertex")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--tau", type=float, default=None,
                   help="apply masking before writing")
    p.add_argument("--out", required=True)
    p.add_argument("--figure", default=None, help="optional heatmap PNG")

    p = sub.add_parser("export-dataset",
                       help="export maps + vertex targets + manifest")
    p.add_argument("--map-dir", default=None, help="directory of .vmap files")
    p.add_argument("--maps", nargs="*", default=None, help="explicit map files")
    p.add_argument("--starts", type=int, default=2)
    p.add_argument("--goals", type=int, default=2)
    p.add_argument("--split", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="multi-trial algorithm comparison")
    p.add_argument("--map-dir", default=None)
    p.add_argument("--maps", nargs="*", default=None)
    p.add_argument("--algos", required=True,
                   help="comma list, e.g. rrt,nrrt,vnrrt,mvnrrt:0.5 "
                        "(mvnrrt takes :tau)")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="raw records CSV path")
    p.add_argument("--summary", default=None, help="also write a summary CSV")
    p.add_argument("--figures", default=None,
                   help="directory for summary figures")
    p.add_argument("--no-timing", action="store_true")
    _add_planner_flags(p)

    p = sub.add_parser("summarize", help="aggregate a raw records CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--figures", default=None)
    return ap


def _load_maps(args) -> dict:
    paths = []
    if args.map_dir:
        paths.extend(sorted(
            os.path.join(args.map_dir, f) for f in os.listdir(args.map_dir)
            if f.endswith(".vmap")))
    if args.maps:
        paths.extend(args.maps)
    if not paths:
        raise VertexPlanError("no maps given (use --map-dir or --maps)")
    return {os.path.splitext(os.path.basename(p))[0]: load_map(p) for p in paths}


def _parse_algos(text: str) -> list:
    specs = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        tau = None
        if ":" in token:
            token, tau_text = token.split(":", 1)
            tau = MaskThreshold(float(tau_text))
        name = ALGO_ALIASES.get(token)
        if name is None:
            raise VertexPlanError(f"unknown algorithm {token!r}")
        specs.append(bench_mod.AlgorithmSpec(name=name, tau=tau))
    if not specs:
        raise VertexPlanError("empty algorithm list")
    return specs


def _planner_config(args, seed, termination, mix=None) -> PlannerConfig:
    return PlannerConfig(steer_step=args.eta, goal_radius=args.goal_radius,
                         max_iterations=args.iterations,
                         rewire_gamma=args.rewire_gamma,
                         guided_mix=args.mix if mix is None else mix,
                         termination=termination, seed=seed)


def cmd_gen_maps(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    shapes = frozenset(s.strip() for s in args.shapes.split(",") if s.strip())
    for i in range(args.count):
        cfg = MapGenConfig(width=args.width, height=args.height,
                           obstacle_count_range=tuple(args.obstacles),
                           shape_set=shapes,
                           obstacle_size_range=tuple(args.size),
                           seed=stable_seed(args.seed, "map", i))
        path = os.path.join(args.out, f"map{i:04d}.vmap")
        save_map(generate_map(cfg), path)
        print(path)
    return 0


def cmd_plan(args) -> int:
    grid = load_map(args.map)
    algo = ALGO_ALIASES[args.algo]
    if algo == "m_vnrrt_star" and args.tau is None:
        raise VertexPlanError("mvnrrt requires --tau")

    guidance = None
    mix = 0.0
    if algo != "rrt_star":
        source = args.guidance or (
            "oracle-path" if algo == "nrrt_star" else "oracle-vertex")
        if source == "oracle-path":
            guidance = oracle_guidance(grid, mode="path", sigma=args.sigma)
        elif source == "oracle-vertex":
            guidance = oracle_guidance(grid, mode="vertex", sigma=args.sigma)
        elif source.startswith("file:"):
            guidance = load_guidance(source[len("file:"):])
        else:
            raise VertexPlanError(f"bad --guidance value {source!r}")
        if args.tau is not None:
            guidance = masked_guidance(guidance, MaskThreshold(args.tau))
        mix = args.mix

    if args.termination == "optimal":
        ref = astar(grid, grid.start, grid.goal).cost
        termination = Termination("optimal", epsilon=args.epsilon,
                                  reference_cost=ref)
    else:
        termination = Termination("initial")
    config = _planner_config(args, args.seed, termination, mix=mix)
    result = plan(grid, config, guidance=guidance)
    print(json.dumps(result.to_json_dict(include_timing=not args.no_timing)))
    if args.figure:
        from .report import render_instance_figure
        render_instance_figure(grid, args.figure, path=result.best_path,
                               guidance=guidance, title=args.algo)
    return 0


def cmd_extract_vertices(args) -> int:
    grid = load_map(args.map)
    path = astar(grid, grid.start, grid.goal)
    vertices = extract_vertices(path)
    print(json.dumps({
        "cost": path.cost,
        "path": [[c.x, c.y] for c in path.cells],
        "vertices": [[c.x, c.y] for c in vertices.vertices],
    }))
    return 0


def cmd_make_guidance(args) -> int:
    grid = load_map(args.map)
    g = oracle_guidance(grid, mode=args.mode, sigma=args.sigma)
    if args.tau is not None:
        g = masked_guidance(g, MaskThreshold(args.tau))
    save_guidance(g, args.out)
    print(args.out)
    if args.figure:
        from .report import render_instance_figure
        render_instance_figure(grid, args.figure, guidance=g,
                               title=f"{args.mode} guidance")
    return 0


def cmd_export_dataset(args) -> int:
    maps = list(_load_maps(args).values())
    manifest = dataset_mod.export_dataset(maps, args.starts, args.goals,
                                          args.out, split=args.split,
                                          seed=args.seed)
    print(json.dumps({"instances": len(manifest["instances"]),
                      "out": args.out}))
    return 0


def cmd_bench(args) -> int:
    maps = _load_maps(args)
    specs = _parse_algos(args.algos)
    base = _planner_config(args, 0, Termination("initial"))
    records = bench_mod.run_benchmark(
        maps, specs, trials=args.trials, termination=args.termination,
        epsilon=args.epsilon, base_seed=args.seed, base_config=base,
        sigma=args.sigma, jobs=args.jobs)
    if args.no_timing:
        # Keeps the summary consistent with re-summarizing the written CSV.
        records = [dataclasses.replace(r, time_s=0.0) for r in records]
    with open(args.out, "w") as fh:
        fh.write(bench_mod.records_to_csv(records,
                                          include_timing=not args.no_timing))
    print(f"wrote {len(records)} records to {args.out}")
    if args.summary or args.figures:
        rows = bench_mod.summarize(records)
        if args.summary:
            with open(args.summary, "w") as fh:
                fh.write(bench_mod.summary_to_csv(rows))
            print(f"wrote summary to {args.summary}")
        if args.figures:
            from .report import render_summary_figures
            for path in render_summary_figures(rows, args.figures):
                print(path)
    return 0


def cmd_summarize(args) -> int:
    with open(args.records) as fh:
        records = bench_mod.records_from_csv(fh.read())
    rows = bench_mod.summarize(records)
    with open(args.out, "w") as fh:
        fh.write(bench_mod.summary_to_csv(rows))
    print(f"wrote summary to {args.out}")
    if args.figures:
        from .report import render_summary_figures
        for path in render_summary_figures(rows, args.figures):
            print(path)
    return 0


_COMMANDS = {
    "gen-maps": cmd_gen_maps,
    "plan": cmd_plan,
    "extract-vertices": cmd_extract_vertices,
    "make-guidance": cmd_make_guidance,
    "export-dataset": cmd_export_dataset,
    "bench": cmd_bench,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (VertexPlanError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
