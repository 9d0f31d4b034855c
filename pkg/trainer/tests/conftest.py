import json

import numpy as np
import pytest

from vertextrain.formats import save_vgm1


def write_vmap(path, grid):
    h, w = grid.shape
    rows = "\n".join("".join(str(int(v)) for v in row) for row in grid)
    path.write_bytes(f"VMAP1\n{w} {h}\n{rows}\n".encode("ascii"))


def make_synthetic_dataset(root, n_train=6, n_test=2, size=16, seed=0):
    """Small hand-built dataset exercising the manifest/file contracts."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    instances = []
    for i in range(n_train + n_test):
        grid = (rng.random((size, size)) < 0.15).astype(np.uint8)
        free = np.argwhere(grid == 0)
        si, gi = rng.choice(len(free), size=2, replace=False)
        grid[tuple(free[si])] = 2
        grid[tuple(free[gi])] = 3
        target = np.zeros((size, size), dtype=np.float32)
        target[tuple(free[si])] = 1.0
        target[tuple(free[gi])] = 1.0
        map_name, target_name = f"i{i:02d}.vmap", f"i{i:02d}.vgm"
        write_vmap(root / map_name, grid)
        save_vgm1(target, root / target_name)
        instances.append({"map_file": map_name, "target_file": target_name,
                          "start": [int(free[si][1]), int(free[si][0])],
                          "goal": [int(free[gi][1]), int(free[gi][0])],
                          "split": "train" if i < n_train else "test"})
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps({"seed": seed, "sigma_note": "synthetic",
                                    "instances": instances}, indent=2))
    return manifest


@pytest.fixture()
def synthetic_manifest(tmp_path):
    return make_synthetic_dataset(tmp_path / "ds")
