"""Dataset loading: manifest JSON -> (one-hot map tensor, target raster) pairs."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import torch

from .formats import FormatError, load_vgm1, load_vmap1

NUM_CLASSES = 4  # free, obstacle, start, goal


class ManifestError(Exception):
    """Manifest missing, unreadable, or inconsistent with its files."""


@dataclass(frozen=True)
class Instance:
    map_path: str
    target_path: str
    split: str


def load_manifest(path) -> list[Instance]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    base = os.path.dirname(os.path.abspath(path))
    instances = []
    for entry in doc.get("instances", []):
        try:
            inst = Instance(map_path=os.path.join(base, entry["map_file"]),
                            target_path=os.path.join(base, entry["target_file"]),
                            split=entry["split"])
        except KeyError as exc:
            raise ManifestError(f"manifest entry missing {exc}") from None
        if inst.split not in ("train", "test"):
            raise ManifestError(f"bad split {inst.split!r}")
        instances.append(inst)
    if not instances:
        raise ManifestError("manifest lists no instances")
    return instances


def map_to_tensor(grid: np.ndarray) -> torch.Tensor:
    """Class grid -> float one-hot tensor of shape (4, H, W)."""
    t = torch.from_numpy(grid.astype(np.int64))
    return torch.nn.functional.one_hot(t, NUM_CLASSES).permute(2, 0, 1).float()


def load_instance_tensors(inst: Instance) -> tuple[torch.Tensor, torch.Tensor]:
    try:
        grid = load_vmap1(inst.map_path)
        target = load_vgm1(inst.target_path)
    except (OSError, FormatError) as exc:
        raise ManifestError(f"cannot load instance {inst.map_path}: {exc}") from None
    if grid.shape != target.shape:
        raise ManifestError(
            f"map {grid.shape} and target {target.shape} shapes differ")
    return map_to_tensor(grid), torch.from_numpy(target).unsqueeze(0)


def load_split_tensors(instances: list[Instance], split: str):
    """Stacked inputs/targets for one split; empty tensors when absent."""
    chosen = [i for i in instances if i.split == split]
    if not chosen:
        return torch.empty(0), torch.empty(0)
    pairs = [load_instance_tensors(i) for i in chosen]
    return (torch.stack([p[0] for p in pairs]),
            torch.stack([p[1] for p in pairs]))
