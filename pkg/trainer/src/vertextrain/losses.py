"""Per-pixel focal loss over probability maps.

FL(p_t) = -(1 - p_t)^gamma * ln(p_t), with p_t the predicted probability of
the true class; gamma = 0 reduces to binary cross-entropy. Vertex pixels are
a tiny minority, so the modulating factor down-weights the easy background.
"""

import torch

# Guards log(0) for saturated predictions without disturbing mid-range values.
EPS = 1e-7


class TrainingDiverged(Exception):
    """Loss became non-finite during training."""


def focal_loss_map(probs: torch.Tensor, targets: torch.Tensor,
                   gamma: float) -> torch.Tensor:
    """Element-wise focal loss; probs in [0, 1], targets in {0, 1}."""
    p_t = probs * targets + (1.0 - probs) * (1.0 - targets)
    p_t = p_t.clamp(EPS, 1.0)
    return -((1.0 - p_t) ** gamma) * torch.log(p_t)


def focal_loss_mean(probs: torch.Tensor, targets: torch.Tensor,
                    gamma: float) -> torch.Tensor:
    return focal_loss_map(probs, targets, gamma).mean()
