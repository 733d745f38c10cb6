"""
Apply predicted weights: 1x1 correlation for target scores and the
attention-conditioned CNN for dense ltrb regression.
"""
from typing import Tuple

import numpy as np
import torch

from tompTracker.geometry import decode_ltrb
from tompTracker.Models.Entities.box_head import BoxHeadCNN
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Models.Fields.cropTransform import CropTransform


def target_scores(w_cls: torch.Tensor, z_test: torch.Tensor) -> torch.Tensor:
    """
    Per-cell inner product <w_cls, z_test[cell]>, (B, C) x (B, C, H, W)
    -> (B, H, W).
    """
    if w_cls.shape[-1] != z_test.shape[1]:
        raise ValueError(
            f"Filter length {w_cls.shape[-1]} does not match "
            f"{z_test.shape[1]} feature channels")
    return torch.einsum("bc,bchw->bhw", w_cls, z_test)


def condition_features(w_bbreg: torch.Tensor, z_test: torch.Tensor):
    """
    Attention map a = <w_bbreg, z_test> and the head input a * z_test.
    """
    attention = target_scores(w_bbreg, z_test)
    return attention, attention.unsqueeze(1) * z_test


def regress_boxes(w_bbreg: torch.Tensor, z_test: torch.Tensor,
                  head: BoxHeadCNN) -> torch.Tensor:
    _, features = condition_features(w_bbreg, z_test)
    return head(features)


def decode_prediction(scores: torch.Tensor, ltrb: torch.Tensor,
                      crop: CropTransform,
                      stride: int = 16) -> Tuple[BoxXYWH, float]:
    """
    Box at the score peak, mapped back to image pixels, and the peak score
    as confidence. Ties go to the smallest row-major index.

    Raises:
        InvalidPredictionError: If the ltrb at the peak decodes to an
            empty box
    """
    values = scores.detach().cpu().double().numpy()
    if values.ndim != 2 or tuple(ltrb.shape) != (4,) + values.shape:
        raise ValueError(
            f"Score map {values.shape} and ltrb {tuple(ltrb.shape)} disagree")
    flat_index = int(np.argmax(values))
    height, width = values.shape
    cell = divmod(flat_index, width)
    confidence = float(values.reshape(-1)[flat_index])
    box = decode_ltrb(ltrb.detach().cpu().double().numpy(), cell, stride,
                      height, width)
    return crop.box_to_image(box), confidence
