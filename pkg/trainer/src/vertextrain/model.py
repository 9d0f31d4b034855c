"""Encoder-decoder segmentation model with a residual encoder.

The encoder stacks residual basic blocks (two 3x3 convolutions, two batch
norms, one ReLU per block) and halves resolution between stages; the decoder
upsamples and concatenates the matching encoder feature map. The "tiny"
preset is the desk-scale default; "paper" mirrors a ResNet34-backbone scale
and exists as a documented preset, not the default.
"""

from __future__ import annotations

import torch
from torch import nn

from .formats import ShapeMismatch

# (base channels, blocks per encoder stage); each stage after the first
# halves the spatial resolution.
SCALE_PRESETS = {
    "tiny": (16, (1, 1, 1)),
    "small": (32, (2, 2, 2)),
    "paper": (64, (3, 4, 6, 3)),
}

MIN_INPUT = 8  # smaller maps cannot survive the down/upsampling ladder


class BasicBlock(nn.Module):
    def __init__(self, cin, cout, stride=1):
        super().__init__()
        self.conv1 = nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(cout)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(cout)
        self.relu = nn.ReLU(inplace=True)
        if stride != 1 or cin != cout:
            self.skip = nn.Sequential(nn.Conv2d(cin, cout, 1, stride=stride,
                                                bias=False),
                                      nn.BatchNorm2d(cout))
        else:
            self.skip = nn.Identity()

    def forward(self, x):
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + self.skip(x))


class VertexNet(nn.Module):
    def __init__(self, scale: str = "tiny", in_channels: int = 4):
        super().__init__()
        if scale not in SCALE_PRESETS:
            raise ValueError(f"unknown scale {scale!r}; one of {sorted(SCALE_PRESETS)}")
        self.scale = scale
        base, depths = SCALE_PRESETS[scale]
        self.stem = nn.Sequential(
            nn.Conv2d(in_channels, base, 3, padding=1, bias=False),
            nn.BatchNorm2d(base), nn.ReLU(inplace=True))

        self.encoder = nn.ModuleList()
        channels = [base]
        cin = base
        for si, blocks in enumerate(depths):
            cout = base * (2 ** si)
            stage = [BasicBlock(cin, cout, stride=1 if si == 0 else 2)]
            stage.extend(BasicBlock(cout, cout) for _ in range(blocks - 1))
            self.encoder.append(nn.Sequential(*stage))
            channels.append(cout)
            cin = cout

        self.decoder = nn.ModuleList()
        enc_channels = channels[1:]  # per-stage output channels
        for si in range(len(depths) - 1, 0, -1):
            cout = enc_channels[si - 1]
            self.decoder.append(nn.Sequential(
                nn.Conv2d(enc_channels[si] + cout, cout, 3, padding=1, bias=False),
                nn.BatchNorm2d(cout), nn.ReLU(inplace=True),
                nn.Conv2d(cout, cout, 3, padding=1, bias=False),
                nn.BatchNorm2d(cout), nn.ReLU(inplace=True)))
        self.upsample = nn.Upsample(scale_factor=2, mode="nearest")
        self.head = nn.Conv2d(enc_channels[0], 1, 1)
        self.n_downsamples = len(depths) - 1

    def freeze_encoder(self):
        for p in self.stem.parameters():
            p.requires_grad = False
        for p in self.encoder.parameters():
            p.requires_grad = False

    def forward(self, x):
        """Logits with the input's spatial shape; any H, W >= MIN_INPUT."""
        h, w = x.shape[-2:]
        if h < MIN_INPUT or w < MIN_INPUT:
            raise ShapeMismatch(f"input {h}x{w} below the {MIN_INPUT}px minimum")
        mult = 2 ** self.n_downsamples
        pad_h = (mult - h % mult) % mult
        pad_w = (mult - w % mult) % mult
        if pad_h or pad_w:
            x = nn.functional.pad(x, (0, pad_w, 0, pad_h))
        x = self.stem(x)
        skips = []
        for stage in self.encoder:
            x = stage(x)
            skips.append(x)
        for di, block in enumerate(self.decoder):
            skip = skips[-(di + 2)]
            x = self.upsample(x)
            x = x[..., : skip.shape[-2], : skip.shape[-1]]
            x = block(torch.cat([x, skip], dim=1))
        logits = self.head(x)
        return logits[..., :h, :w]

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
