import json
import math
from pathlib import Path

import pytest
import torch

from vertextrain.losses import focal_loss_map, focal_loss_mean

# Test vector produced by the planner package's reference loss; the sole
# cross-package contract for loss parity.
SHARED_VECTOR = Path(__file__).resolve().parents[2] / "tests" / "data" / \
    "focal_loss_vectors.json"


class TestFocalLoss:
    def test_perfect_prediction(self):
        probs = torch.tensor([1.0, 0.0])
        targets = torch.tensor([1.0, 0.0])
        out = focal_loss_map(probs, targets, gamma=2.0)
        assert torch.allclose(out, torch.zeros(2), atol=1e-6)

    def test_reference_value(self):
        out = focal_loss_map(torch.tensor([0.5]), torch.tensor([1.0]), gamma=2.0)
        assert out.item() == pytest.approx(0.25 * math.log(2), abs=1e-7)

    def test_gamma_zero_is_bce(self):
        torch.manual_seed(3)
        probs = torch.rand(4, 1, 16, 16) * 0.98 + 0.01
        targets = (torch.rand(4, 1, 16, 16) < 0.1).float()
        ours = focal_loss_mean(probs, targets, gamma=0.0)
        bce = torch.nn.functional.binary_cross_entropy(probs, targets)
        assert abs(ours.item() - bce.item()) < 1e-6

    def test_never_exceeds_cross_entropy(self):
        torch.manual_seed(4)
        probs = torch.rand(1000) * 0.98 + 0.01
        targets = (torch.rand(1000) < 0.5).float()
        focal = focal_loss_map(probs, targets, gamma=2.0)
        ce = focal_loss_map(probs, targets, gamma=0.0)
        assert torch.all(focal <= ce + 1e-9)


class TestCrossComponentParity:
    def test_scalar_values(self):
        doc = json.loads(SHARED_VECTOR.read_text())
        gamma = doc["gamma"]
        for entry in doc["scalars"]:
            ours = focal_loss_map(torch.tensor([entry["p_t"]], dtype=torch.float64),
                                  torch.tensor([1.0], dtype=torch.float64),
                                  gamma).item()
            assert ours == pytest.approx(entry["loss"], abs=1e-6)

    def test_grid_mean_loss(self):
        doc = json.loads(SHARED_VECTOR.read_text())
        grid = doc["grid"]
        preds = torch.tensor(grid["predictions"], dtype=torch.float64)
        targets = torch.tensor(grid["targets"], dtype=torch.float64)
        ours = focal_loss_mean(preds, targets, doc["gamma"]).item()
        assert ours == pytest.approx(grid["expected_mean_loss"], abs=1e-6)
