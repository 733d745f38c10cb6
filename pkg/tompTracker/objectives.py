"""
Training losses and the finite-difference gradient checker.
"""
import logging
import math
from typing import Callable, Sequence

import torch

from tompTracker.config import LossWeights
from tompTracker.geometry import cell_boxes, paired_giou


logger = logging.getLogger(__name__)


def classification_residual(scores: torch.Tensor, label: torch.Tensor,
                            tau: float = 0.05) -> torch.Tensor:
    """
    scores - y on foreground (y > tau), max(0, scores) on background.
    """
    return torch.where(label > tau, scores - label, torch.relu(scores))


def loss_cls(scores: torch.Tensor, label: torch.Tensor,
             tau: float = 0.05) -> torch.Tensor:
    if scores.shape != label.shape:
        raise ValueError(
            f"Scores {tuple(scores.shape)} and labels {tuple(label.shape)} "
            "disagree")
    return classification_residual(scores, label, tau).pow(2).mean()


def loss_giou(pred_ltrb: torch.Tensor, target_ltrb: torch.Tensor,
              fg_mask: torch.Tensor) -> torch.Tensor:
    """
    Mean of 1 - GIoU over foreground cells, comparing the boxes each map
    encodes at the cell. Maps are (B, 4, H, W), the mask (B, H, W).

    An empty foreground mask gives a zero loss and a logged warning.
    """
    if pred_ltrb.shape != target_ltrb.shape:
        raise ValueError("Predicted and target ltrb maps disagree")
    pred = pred_ltrb.permute(0, 2, 3, 1)[fg_mask]
    target = target_ltrb.permute(0, 2, 3, 1)[fg_mask]
    if pred.shape[0] == 0:
        logger.warning("GIoU loss over an empty foreground mask")
        return pred_ltrb.sum() * 0.0
    giou = paired_giou(cell_boxes(pred), cell_boxes(target))
    return (1.0 - giou).mean()


def center_mask(label: torch.Tensor) -> torch.Tensor:
    """
    Mask holding only the label peak of each map.
    """
    batch = label.shape[0]
    flat = label.reshape(batch, -1)
    mask = torch.zeros_like(flat, dtype=torch.bool)
    mask[torch.arange(batch), flat.argmax(dim=1)] = True
    return mask.reshape(label.shape)


def loss_total(l_cls: torch.Tensor, l_giou: torch.Tensor,
               weights: LossWeights = None) -> torch.Tensor:
    weights = weights or LossWeights()
    return weights.lambda_cls * l_cls + weights.lambda_giou * l_giou


def check_gradients(fn: Callable[[], torch.Tensor],
                    params: Sequence[torch.Tensor],
                    eps: float = 1e-6, atol: float = 1e-3) -> float:
    """
    Largest relative difference between autograd gradients and central
    differences (f(p + eps) - f(p - eps)) / 2 eps over every element of
    params. The denominator is max(|analytic|, |numeric|, atol).

    Run at float64. Non-finite gradients return infinity.
    """
    params = list(params)
    analytic = torch.autograd.grad(fn(), params, allow_unused=True)
    worst = 0.0
    with torch.no_grad():
        for param, grad in zip(params, analytic):
            if grad is None:
                grad = torch.zeros_like(param)
            if not torch.isfinite(grad).all():
                logger.warning("Non-finite analytic gradient")
                return math.inf
            flat = param.view(-1)
            flat_grad = grad.reshape(-1)
            for index in range(flat.numel()):
                original = flat[index].item()
                flat[index] = original + eps
                upper = fn().item()
                flat[index] = original - eps
                lower = fn().item()
                flat[index] = original
                numeric = (upper - lower) / (2 * eps)
                exact = flat_grad[index].item()
                if not math.isfinite(numeric):
                    logger.warning("Non-finite numeric gradient")
                    return math.inf
                scale = max(abs(exact), abs(numeric), atol)
                worst = max(worst, abs(exact - numeric) / scale)
    return worst
