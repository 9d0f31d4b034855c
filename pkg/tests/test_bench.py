import math

import numpy as np
import pytest

from vertexplan.bench import (
    AlgorithmSpec,
    SummaryRow,
    TrialRecord,
    records_from_csv,
    records_to_csv,
    run_benchmark,
    summarize,
    summary_from_csv,
    summary_to_csv,
)
from vertexplan.errors import EmptyInput, GuidanceFileMissing
from vertexplan.gridmap import MapGenConfig, generate_map
from vertexplan.guidance import MaskThreshold
from vertexplan.planner import PlannerConfig, Termination


def small_maps(n=2):
    return {f"m{i}": generate_map(MapGenConfig(width=36, height=36,
                                               obstacle_count_range=(2, 3),
                                               obstacle_size_range=(5.0, 8.0),
                                               seed=i)) for i in range(n)}


def fast_config():
    return PlannerConfig(steer_step=5.0, goal_radius=3.0, max_iterations=20_000,
                         termination=Termination("initial"), seed=0)


def record(algorithm="rrt_star", map_id="m0", trial=0, status="Solved",
           path_length=10.0, time_s=1.0, iterations=100, iters_to_first=50):
    return TrialRecord(map_id=map_id, algorithm=algorithm, tau=None, trial=trial,
                       seed=trial, status=status, path_length=path_length,
                       time_s=time_s, iterations=iterations,
                       iters_to_first=iters_to_first)


class TestAlgorithmSpec:
    def test_defaults(self):
        assert AlgorithmSpec("rrt_star").guidance_source is None
        assert AlgorithmSpec("nrrt_star").guidance_source == "oracle_path"
        assert AlgorithmSpec("vnrrt_star").guidance_source == "oracle_vertex"
        spec = AlgorithmSpec("m_vnrrt_star", tau=MaskThreshold(0.5))
        assert spec.guidance_source == "oracle_vertex"
        assert spec.label == "m_vnrrt_star_tau0.5"

    def test_validation(self):
        with pytest.raises(ValueError):
            AlgorithmSpec("m_vnrrt_star")  # tau missing
        with pytest.raises(ValueError):
            AlgorithmSpec("rrt_star", tau=MaskThreshold(0.5))
        with pytest.raises(ValueError):
            AlgorithmSpec("rrt_star", guidance_source="oracle_path")
        with pytest.raises(ValueError):
            AlgorithmSpec("dijkstra")


class TestRunBenchmark:
    def test_record_count_and_distinct_seeds(self):
        maps = small_maps(1)
        recs = run_benchmark(maps, [AlgorithmSpec("rrt_star")], trials=3,
                             base_seed=1, base_config=fast_config())
        assert len(recs) == 3
        assert len({r.seed for r in recs}) == 3
        assert all(r.status == "Solved" for r in recs)

    def test_rerun_identical_modulo_time(self):
        maps = small_maps(1)
        specs = [AlgorithmSpec("rrt_star"), AlgorithmSpec("vnrrt_star")]
        a = run_benchmark(maps, specs, trials=2, base_seed=7,
                          base_config=fast_config())
        b = run_benchmark(maps, specs, trials=2, base_seed=7,
                          base_config=fast_config())
        strip = lambda rs: [(r.map_id, r.algorithm, r.tau, r.trial, r.seed,
                             r.status, r.path_length, r.iterations,
                             r.iters_to_first) for r in rs]
        assert strip(a) == strip(b)
        assert records_to_csv(a, include_timing=False) == \
            records_to_csv(b, include_timing=False)

    def test_parallel_matches_sequential(self):
        maps = small_maps(1)
        specs = [AlgorithmSpec("rrt_star")]
        seq = run_benchmark(maps, specs, trials=4, base_seed=3,
                            base_config=fast_config(), jobs=1)
        par = run_benchmark(maps, specs, trials=4, base_seed=3,
                            base_config=fast_config(), jobs=2)
        assert records_to_csv(seq, include_timing=False) == \
            records_to_csv(par, include_timing=False)

    def test_optimal_termination_uses_astar_reference(self):
        maps = small_maps(1)
        recs = run_benchmark(maps, [AlgorithmSpec("vnrrt_star")], trials=1,
                             termination="optimal", epsilon=0.05, base_seed=2,
                             base_config=fast_config())
        assert recs[0].status in ("Solved", "IterationBudgetExhausted")
        if recs[0].status == "Solved":
            from vertexplan.oracle import astar
            m = maps["m0"]
            ref = astar(m, m.start, m.goal).cost
            assert recs[0].path_length <= 1.05 * ref + 1e-9

    def test_missing_guidance_file_raises(self):
        maps = small_maps(1)
        spec = AlgorithmSpec("vnrrt_star", guidance_source="file:/nonexistent.vgm")
        with pytest.raises(GuidanceFileMissing):
            run_benchmark(maps, [spec], trials=1, base_config=fast_config())

    def test_vertex_guidance_speeds_optimal_convergence(self):
        from vertexplan.seeding import stable_seed
        maps = {f"m{i:02d}": generate_map(MapGenConfig(
                    width=100, height=100, obstacle_count_range=(4, 8),
                    obstacle_size_range=(10.0, 22.0),
                    seed=stable_seed("opt-trend", i)))
                for i in range(16)}
        recs = run_benchmark(maps,
                             [AlgorithmSpec("rrt_star"), AlgorithmSpec("vnrrt_star")],
                             trials=1, termination="optimal", epsilon=0.05,
                             base_seed=5,
                             base_config=PlannerConfig(max_iterations=30_000))
        rows = summarize(recs)
        iters = {r.algorithm: r.mean for r in rows if r.metric == "iterations"}
        assert iters["vnrrt_star"] < iters["rrt_star"]


class TestSummarize:
    def test_two_point_mean_std(self):
        recs = [record(trial=0, time_s=10.0), record(trial=1, time_s=12.0)]
        rows = summarize(recs)
        time_row = next(r for r in rows if r.metric == "time_cost")
        assert time_row.mean == pytest.approx(11.0)
        assert time_row.std == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert time_row.n == 2

    def test_improvement_formula(self):
        recs = ([record("rrt_star", trial=t, time_s=25.0) for t in range(2)]
                + [record("vnrrt_star", trial=t, time_s=5.0) for t in range(2)])
        rows = summarize(recs)
        imp = next(r for r in rows
                   if r.algorithm == "vnrrt_star" and r.metric == "time_cost")
        assert imp.improvement_vs_rrtstar_pct == pytest.approx(400.0)
        base = next(r for r in rows
                    if r.algorithm == "rrt_star" and r.metric == "time_cost")
        assert base.improvement_vs_rrtstar_pct == pytest.approx(0.0)

    def test_single_algorithm_no_improvement_column(self):
        rows = summarize([record(trial=t) for t in range(3)])
        assert all(r.improvement_vs_rrtstar_pct is None for r in rows)
        header = summary_to_csv(rows).splitlines()[0]
        assert "improvement" not in header

    def test_failures_excluded_from_path_length(self):
        recs = [record(trial=0, path_length=10.0),
                record(trial=1, status="IterationBudgetExhausted",
                       path_length=None, iters_to_first=None)]
        rows = summarize(recs)
        pl = next(r for r in rows if r.metric == "path_length")
        assert pl.n == 1 and pl.mean == pytest.approx(10.0)
        sr = next(r for r in rows if r.metric == "success_rate")
        assert sr.mean == pytest.approx(0.5)

    def test_mean_matches_brute_force(self):
        rng = np.random.default_rng(13)
        recs = [record(trial=t, iterations=int(rng.integers(1, 1000)))
                for t in range(50)]
        rows = summarize(recs)
        iters = next(r for r in rows if r.metric == "iterations")
        raw = [r.iterations for r in recs]
        assert iters.mean == sum(raw) / len(raw)

    def test_map_sets_grouping(self):
        recs = [record(map_id="a", trial=0), record(map_id="b", trial=0)]
        rows = summarize(recs, map_sets={"a": "easy", "b": "hard"})
        assert {r.map_set for r in rows} == {"easy", "hard"}

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            summarize([])


class TestCsvRoundTrip:
    def test_records(self):
        recs = [record(trial=0), record("m_vnrrt_star_tau0.5", trial=1,
                                        status="IterationBudgetExhausted",
                                        path_length=None, iters_to_first=None)]
        recs[1] = TrialRecord(**{**recs[1].__dict__, "tau": 0.5})
        text = records_to_csv(recs)
        assert records_from_csv(text) == recs

    def test_summary(self):
        rows = [SummaryRow("rrt_star", "all", "time_cost", 11.03, 1.414, 2, 0.0),
                SummaryRow("vnrrt_star", "all", "time_cost", 5.5, None, 2, 400.5)]
        assert summary_from_csv(summary_to_csv(rows)) == rows

    def test_summary_without_improvement(self):
        rows = [SummaryRow("rrt_star", "all", "iterations", 5.0, 2.0, 3, None)]
        assert summary_from_csv(summary_to_csv(rows)) == rows
