import math

import pytest
import torch
from tompTracker.config import LossWeights
from tompTracker.objectives import (
    center_mask,
    check_gradients,
    classification_residual,
    loss_cls,
    loss_giou,
    loss_total
)


def test_classification_residual_hinges_background():
    label = torch.tensor([0.0, 0.01, 0.5, 1.0])
    scores = torch.tensor([-2.0, 0.3, 0.2, 1.5])
    residual = classification_residual(scores, label, 0.05)
    assert residual.tolist() == pytest.approx([0.0, 0.3, -0.3, 0.5])


def test_loss_cls_is_mean_square():
    label = torch.tensor([[[0.0, 1.0]]])
    scores = torch.tensor([[[0.5, 0.5]]])
    assert float(loss_cls(scores, label)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        loss_cls(scores, torch.zeros(1, 2, 1))


def test_loss_cls_zero_for_negative_background():
    label = torch.zeros(1, 3, 3)
    assert float(loss_cls(-torch.ones(1, 3, 3), label)) == 0.0


def test_giou_loss_zero_iff_equal_and_bounded():
    torch.manual_seed(0)
    target = torch.rand(2, 4, 3, 3, dtype=torch.float64) + 0.05
    mask = torch.ones(2, 3, 3, dtype=torch.bool)
    assert float(loss_giou(target.clone(), target, mask)) == pytest.approx(
        0.0, abs=1e-12)
    for _ in range(50):
        pred = torch.rand(2, 4, 3, 3, dtype=torch.float64) * 2 + 1e-3
        value = float(loss_giou(pred, target, mask))
        assert 0.0 < value <= 2.0


def test_giou_loss_only_reads_masked_cells():
    target = torch.full((1, 4, 2, 2), 0.2)
    pred = torch.full((1, 4, 2, 2), 0.2)
    pred[0, :, 1, 1] = 0.9
    mask = torch.zeros(1, 2, 2, dtype=torch.bool)
    mask[0, 0, 0] = True
    assert float(loss_giou(pred, target, mask)) == pytest.approx(0.0)


def test_giou_loss_empty_mask_warns(caplog):
    pred = torch.rand(1, 4, 2, 2, requires_grad=True)
    mask = torch.zeros(1, 2, 2, dtype=torch.bool)
    value = loss_giou(pred, pred.detach(), mask)
    assert float(value) == 0.0
    value.backward()
    assert torch.all(pred.grad == 0)
    assert "empty foreground" in caplog.text


def test_center_mask():
    label = torch.zeros(2, 3, 3)
    label[0, 1, 2] = 1.0
    label[1, 0, 0] = 0.7
    mask = center_mask(label)
    assert mask.sum() == 2
    assert mask[0, 1, 2] and mask[1, 0, 0]


def test_loss_total_weights():
    total = loss_total(torch.tensor(0.01), torch.tensor(0.5))
    assert float(total) == pytest.approx(100 * 0.01 + 0.5)
    custom = loss_total(torch.tensor(1.0), torch.tensor(1.0),
                        LossWeights(lambda_cls=2.0, lambda_giou=3.0))
    assert float(custom) == 5.0


def test_check_gradients_on_a_polynomial():
    x = torch.tensor([0.3, -1.2, 2.0], dtype=torch.float64,
                     requires_grad=True)
    error = check_gradients(lambda: (x ** 3).sum() + x.prod(), [x])
    assert error < 1e-6


def test_check_gradients_flags_wrong_gradient():
    x = torch.tensor([1.0, 2.0], dtype=torch.float64, requires_grad=True)

    class Wrong(torch.autograd.Function):
        @staticmethod
        def forward(ctx, value):
            return value.pow(2).sum()

        @staticmethod
        def backward(ctx, grad):
            return grad * torch.ones(2, dtype=torch.float64)

    assert check_gradients(lambda: Wrong.apply(x), [x]) > 0.1


def test_check_gradients_non_finite():
    x = torch.tensor([0.0], dtype=torch.float64, requires_grad=True)
    assert check_gradients(lambda: torch.sqrt(x).sum(), [x]) == math.inf
