from typing import List, Optional, Sequence, Tuple

import torch
from torch import nn

from tompTracker.config import ModelConfig
from tompTracker.geometry import make_labels
from tompTracker.heads import regress_boxes, target_scores
from tompTracker.Models.Entities.box_head import BoxHeadCNN
from tompTracker.Models.Entities.model_predictor import ModelPredictor
from tompTracker.Models.Entities.target_encoding import TargetEncoding
from tompTracker.Models.Entities.tiny_backbone import TinyBackbone
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Models.Fields.tokenSequence import (
    MaskSpec,
    PredictedWeights,
    build_sequence
)


class TompNet(nn.Module):
    """
    Backbone, target encodings, transformer model predictor and box head.

    Training frames enter with their patch-frame boxes; the test frame
    enters as pixels only, so its annotation can reach the losses but never
    the encodings.
    """

    def __init__(self, config: Optional[ModelConfig] = None):
        super(TompNet, self).__init__()
        self.config = config or ModelConfig()
        c = self.config
        self.backbone = TinyBackbone(c.channels, c.backbone_channels)
        self.encoding = TargetEncoding(c.channels, c.extent_hidden,
                                       c.use_bg_embedding,
                                       c.use_test_embedding,
                                       c.use_extent_encoding)
        self.predictor = ModelPredictor(c.channels, c.transformer)
        self.box_head = BoxHeadCNN(c.channels, c.head_width, c.head_kernel)

    def extract_features(self, patches: torch.Tensor) -> torch.Tensor:
        return self.backbone(patches)

    def make_labels(self, boxes: Sequence[BoxXYWH],
                    like: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        c = self.config
        labels, ltrb = make_labels(boxes, c.score_size, c.stride,
                                   c.sigma_ratio, like.dtype)
        return labels.to(like.device), ltrb.to(like.device)

    def predict(self, x_train: List[torch.Tensor],
                labels: List[torch.Tensor], ltrbs: List[torch.Tensor],
                x_test: torch.Tensor, mask_spec: MaskSpec = None):
        """
        Returns:
            (PredictedWeights, encoded test features)
        """
        v_train = [self.encoding.train_tokens(x, y, d)
                   for x, y, d in zip(x_train, labels, ltrbs)]
        v_test = self.encoding.test_tokens(x_test)
        seq = build_sequence(v_train, v_test, mask_spec)
        return self.predictor(seq, self.encoding.e_fg)

    def apply_heads(self, weights: PredictedWeights, z_test: torch.Tensor):
        scores = target_scores(weights.w_cls, z_test)
        ltrb = regress_boxes(weights.w_bbreg, z_test, self.box_head)
        return scores, ltrb

    def forward(self, train_patches: torch.Tensor,
                train_boxes: Sequence[Sequence[BoxXYWH]],
                test_patch: torch.Tensor):
        """
        train_patches: (B, m, 3, S, S); train_boxes: B lists of m patch-frame
        boxes; test_patch: (B, 3, S, S).

        Returns:
            scores (B, H, W) and dense ltrb (B, 4, H, W)
        """
        batch, num_train = train_patches.shape[:2]
        features = self.extract_features(
            torch.cat([train_patches.flatten(0, 1), test_patch]))
        x_train = features[:batch * num_train]
        x_train = x_train.view(batch, num_train, *x_train.shape[1:])
        x_test = features[batch * num_train:]

        maps, labels, ltrbs = [], [], []
        for frame in range(num_train):
            boxes = [train_boxes[row][frame] for row in range(batch)]
            label, ltrb = self.make_labels(boxes, x_test)
            maps.append(x_train[:, frame])
            labels.append(label)
            ltrbs.append(ltrb)
        weights, z_test = self.predict(maps, labels, ltrbs, x_test)
        return self.apply_heads(weights, z_test)
