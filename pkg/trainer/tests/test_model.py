import pytest
import torch

from vertextrain.formats import ShapeMismatch
from vertextrain.model import SCALE_PRESETS, VertexNet


class TestVertexNet:
    def test_output_matches_input_shape(self):
        model = VertexNet(scale="tiny")
        for h, w in ((64, 64), (200, 200), (37, 53), (8, 8)):
            out = model(torch.randn(1, 4, h, w))
            assert out.shape == (1, 1, h, w)

    def test_presets_scale_parameters(self):
        counts = {s: VertexNet(scale=s).parameter_count() for s in SCALE_PRESETS}
        assert counts["tiny"] < counts["small"] < counts["paper"]
        assert counts["paper"] > 10_000_000

    def test_unknown_scale(self):
        with pytest.raises(ValueError):
            VertexNet(scale="huge")

    def test_too_small_input(self):
        model = VertexNet(scale="tiny")
        with pytest.raises(ShapeMismatch):
            model(torch.randn(1, 4, 4, 4))

    def test_freeze_encoder(self):
        model = VertexNet(scale="tiny")
        model.freeze_encoder()
        frozen = [p for p in model.parameters() if not p.requires_grad]
        trainable = [p for p in model.parameters() if p.requires_grad]
        assert frozen and trainable
        assert all(not p.requires_grad for p in model.encoder.parameters())
        assert all(p.requires_grad for p in model.head.parameters())

    def test_forward_deterministic(self):
        torch.manual_seed(0)
        model = VertexNet(scale="tiny")
        model.eval()
        x = torch.randn(2, 4, 32, 32)
        a = model(x)
        b = model(x)
        assert torch.equal(a, b)
