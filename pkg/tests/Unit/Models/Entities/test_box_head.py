import torch
from tompTracker.Models.Entities.box_head import BoxHeadCNN


def test_positive_dense_output():
    torch.manual_seed(0)
    head = BoxHeadCNN(channels=8, width=8, kernel=3)
    out = head(torch.randn(2, 8, 4, 4))
    assert out.shape == (2, 4, 4, 4)
    assert torch.all(out > 0)


def test_output_bias_starts_at_zero():
    head = BoxHeadCNN(channels=8, width=8)
    assert torch.all(head.output.bias == 0)
    assert len(head.tower) == 12
