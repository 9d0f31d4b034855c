"""Training loop: focal loss against VGM1 vertex targets, metrics CSV,
best-checkpoint selection by test loss (train loss when no test split).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import torch

from .data import load_manifest, load_split_tensors
from .losses import TrainingDiverged, focal_loss_mean
from .model import VertexNet

@dataclass
class TrainConfig:
    manifest: str
    epochs: int = 100
    batch_size: int = 8
    lr: float = 1e-3
    gamma: float = 2.0
    scale: str = "tiny"
    seed: int = 0
    freeze_encoder: bool = False
    checkpoint: str = "vertexnet.pt"
    metrics_csv: str | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.gamma < 0 or not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite and >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class TrainOutcome:
    checkpoint: str
    metrics: list  # (epoch, split, mean_focal_loss) rows
    best_loss: float
    epoch_train_losses: list = field(default_factory=list)


def _epoch_mean_loss(model, inputs, targets, gamma, batch_size, optimizer=None):
    total, count = 0.0, 0
    for lo in range(0, len(inputs), batch_size):
        xb = inputs[lo:lo + batch_size]
        yb = targets[lo:lo + batch_size]
        probs = torch.sigmoid(model(xb))
        loss = focal_loss_mean(probs, yb, gamma)
        if not torch.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss {loss.item()!r}")
        if optimizer is not None:
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        total += float(loss.item()) * len(xb)
        count += len(xb)
    return total / count


def train(cfg: TrainConfig) -> TrainOutcome:
    torch.manual_seed(cfg.seed)
    instances = load_manifest(cfg.manifest)
    train_x, train_y = load_split_tensors(instances, "train")
    test_x, test_y = load_split_tensors(instances, "test")
    if len(train_x) == 0:
        raise ValueError("manifest has no training instances")
    has_test = len(test_x) > 0

    model = VertexNet(scale=cfg.scale)
    if cfg.freeze_encoder:
        model.freeze_encoder()
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=cfg.lr)
    shuffler = torch.Generator().manual_seed(cfg.seed)

    metrics = []
    train_losses = []
    best_loss = math.inf
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        order = torch.randperm(len(train_x), generator=shuffler)
        mean_train = _epoch_mean_loss(model, train_x[order], train_y[order],
                                      cfg.gamma, cfg.batch_size, optimizer)
        metrics.append((epoch, "train", mean_train))
        train_losses.append(mean_train)

        model.eval()
        if has_test:
            with torch.no_grad():
                mean_test = _epoch_mean_loss(model, test_x, test_y, cfg.gamma,
                                             cfg.batch_size)
            metrics.append((epoch, "test", mean_test))
            selection = mean_test
        else:
            selection = mean_train

        if selection < best_loss:
            best_loss = selection
            _save_checkpoint(model, cfg)

    if cfg.metrics_csv:
        os.makedirs(os.path.dirname(os.path.abspath(cfg.metrics_csv)), exist_ok=True)
        with open(cfg.metrics_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("epoch", "split", "mean_focal_loss"))
            w.writerows(metrics)
    return TrainOutcome(checkpoint=cfg.checkpoint, metrics=metrics,
                        best_loss=best_loss, epoch_train_losses=train_losses)


def _save_checkpoint(model: VertexNet, cfg: TrainConfig):
    os.makedirs(os.path.dirname(os.path.abspath(cfg.checkpoint)), exist_ok=True)
    torch.save({"state_dict": model.state_dict(), "scale": model.scale,
                "gamma": cfg.gamma}, cfg.checkpoint)


def load_checkpoint(path) -> VertexNet:
    doc = torch.load(path, map_location="cpu", weights_only=True)
    model = VertexNet(scale=doc["scale"])
    model.load_state_dict(doc["state_dict"])
    model.eval()
    return model
