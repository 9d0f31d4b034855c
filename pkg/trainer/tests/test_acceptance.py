"""Trainer acceptance: overfit behavior and cross-package integration.

The dataset is produced by the planner package's CLI, and inferred rasters
are fed back to it through `plan --guidance file:...` — files and the CLI
are the only contact surface between the two packages.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from vertextrain.data import load_manifest
from vertextrain.formats import load_vgm1, load_vmap1
from vertextrain.infer import infer_raster, infer_to_file
from vertextrain.train import TrainConfig, load_checkpoint, train


def _pass(name):
    print(f"\nACCEPTANCE PASS: {name}")


def planner_cli(*args):
    return subprocess.run([sys.executable, "-m", "vertexplan.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    """50 instances (25 maps x 1 start x 2 goals) exported by the planner CLI."""
    root = tmp_path_factory.mktemp("overfit")
    maps_dir = root / "maps"
    gen = planner_cli("gen-maps", "--count", "25", "--width", "64",
                      "--height", "64", "--obstacles", "2", "5",
                      "--size", "8", "16", "--seed", "21",
                      "--out", str(maps_dir))
    assert gen.returncode == 0, gen.stderr
    export = planner_cli("export-dataset", "--map-dir", str(maps_dir),
                         "--starts", "1", "--goals", "2", "--split", "1.0",
                         "--seed", "4", "--out", str(root / "ds"))
    assert export.returncode == 0, export.stderr
    return root / "ds" / "manifest.json"


@pytest.fixture(scope="module")
def overfit_run(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = TrainConfig(manifest=str(dataset), epochs=100, batch_size=8,
                      lr=1e-3, gamma=2.0, scale="tiny", seed=0,
                      checkpoint=str(out / "ckpt.pt"),
                      metrics_csv=str(out / "metrics.csv"))
    outcome = train(cfg)
    return cfg, outcome


def test_overfit_loss_reduction(overfit_run):
    cfg, outcome = overfit_run
    losses = outcome.epoch_train_losses
    assert len(losses) == 100
    ratio = losses[-1] / losses[0]
    assert ratio <= 0.10, f"train loss only fell to {ratio:.1%} of epoch 1"
    _pass(f"trainer-overfit-loss (epoch1 {losses[0]:.4f} -> final "
          f"{losses[-1]:.4f}, ratio {ratio:.3f})")


def test_memorized_vertices_recall(overfit_run, dataset):
    cfg, _ = overfit_run
    model = load_checkpoint(cfg.checkpoint)
    recalls = []
    for inst in load_manifest(dataset):
        grid = load_vmap1(inst.map_path)
        target = load_vgm1(inst.target_path)
        pred = infer_raster(model, grid)
        true = {tuple(rc) for rc in np.argwhere(target > 0.5)}
        k = len(true)
        flat = np.argsort(pred.ravel())[::-1][:k]
        top = {(int(i // pred.shape[1]), int(i % pred.shape[1])) for i in flat}
        recalls.append(len(true & top) / k)
    median = float(np.median(recalls))
    assert median >= 0.5, f"median recall@k {median:.2f}"
    _pass(f"trainer-recall-at-k (median {median:.2f} over 50 instances)")


def test_inferred_rasters_drive_planner(overfit_run, dataset, tmp_path):
    t0 = time.perf_counter()
    cfg, _ = overfit_run
    instances = load_manifest(dataset)
    assert len(instances) == 50
    solved = 0
    for i, inst in enumerate(instances):
        raster_path = tmp_path / f"g{i:02d}.vgm"
        infer_to_file(cfg.checkpoint, inst.map_path, raster_path)
        proc = planner_cli("plan", "--map", inst.map_path, "--algo", "vnrrt",
                           "--guidance", f"file:{raster_path}",
                           "--tau", "0.5", "--termination", "initial",
                           "--iterations", "100000", "--eta", "5",
                           "--goal-radius", "3", "--seed", str(i),
                           "--no-timing")
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(proc.stdout)
        solved += doc["status"] == "Solved"
    elapsed = time.perf_counter() - t0
    assert solved == 50, f"only {solved}/50 instances solved"
    _pass(f"trainer-planner-integration (50/50 solved, {elapsed:.0f}s)")
