"""Inference: checkpoint + VMAP1 map -> VGM1 guidance raster."""

from __future__ import annotations

import numpy as np
import torch

from .data import map_to_tensor
from .formats import load_vmap1, save_vgm1, write_vgm1
from .train import load_checkpoint


def infer_raster(model, grid: np.ndarray) -> np.ndarray:
    """Sigmoid probabilities as float32 (height, width) in [0, 1]."""
    x = map_to_tensor(grid).unsqueeze(0)
    with torch.no_grad():
        probs = torch.sigmoid(model(x))[0, 0]
    return np.clip(probs.numpy().astype(np.float32), 0.0, 1.0)


def infer_to_vgm1(checkpoint_path, map_path) -> bytes:
    model = load_checkpoint(checkpoint_path)
    return write_vgm1(infer_raster(model, load_vmap1(map_path)))


def infer_to_file(checkpoint_path, map_path, out_path) -> None:
    model = load_checkpoint(checkpoint_path)
    save_vgm1(infer_raster(model, load_vmap1(map_path)), out_path)
