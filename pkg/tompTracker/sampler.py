"""
Training triplets: two training frames and one test frame from one sequence,
cropped around jittered ground truth.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import Dataset

from tompTracker.config import AugmentConfig, TrainConfig
from tompTracker.geometry import make_crop
from tompTracker.Models.Entities.tiny_backbone import patch_to_tensor
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Models.Fields.cropTransform import CropTransform


@dataclass
class TrainingTriplet:
    train_patches: np.ndarray
    train_boxes: List[BoxXYWH]
    test_patch: np.ndarray
    test_box: BoxXYWH
    indices: Tuple[int, int, int]
    flipped: bool = False


@dataclass
class TripletBatch:
    train_patches: torch.Tensor
    train_boxes: List[List[BoxXYWH]]
    test_patch: torch.Tensor
    test_boxes: List[BoxXYWH]


def _jittered_crop(box: BoxXYWH, rng: np.random.Generator,
                   center_jitter: float, scale_jitter: float, factor: float,
                   out_px: int) -> CropTransform:
    w, h = np.array([box.w, box.h]) * np.exp(rng.normal(0, scale_jitter, 2))
    reach = center_jitter * np.sqrt(w * h)
    cx, cy = np.array(box.center()) + reach * (rng.random(2) - 0.5)
    return make_crop(BoxXYWH(cx - 0.5 * w, cy - 0.5 * h, w, h), factor,
                     out_px)


def sample_triplet(sequence, window: int, rng: np.random.Generator,
                   out_px: int = 288, search_factor: float = 5.0,
                   augment: AugmentConfig = None) -> TrainingTriplet:
    """
    Draw three distinct frames whose index spread stays below window; the
    first two sorted frames train, the third tests.

    sequence: anything with len(), frame(i) and a boxes (N, 4) array.
    """
    augment = augment or AugmentConfig()
    n = len(sequence)
    if n < 3:
        raise ValueError(f"A triplet needs three frames, the sequence has {n}")
    span = min(window, n)
    start = int(rng.integers(0, n - span + 1))
    picks = rng.choice(span, size=3, replace=False) + start
    train_indices = sorted(int(i) for i in picks[:2])
    indices = (train_indices[0], train_indices[1], int(picks[2]))

    flip = augment.augment and rng.random() < augment.flip_prob
    if augment.augment:
        gains = rng.uniform(1 - augment.color_jitter, 1 + augment.color_jitter,
                            size=3)
    else:
        gains = np.ones(3)

    patches, boxes = [], []
    for position, index in enumerate(indices):
        gt = BoxXYWH.from_sequence(sequence.boxes[index])
        if not augment.augment:
            crop = make_crop(gt, search_factor, out_px)
        elif position < 2:
            crop = _jittered_crop(gt, rng, augment.center_jitter_train,
                                  augment.scale_jitter_train, search_factor,
                                  out_px)
        else:
            crop = _jittered_crop(gt, rng, augment.center_jitter_test,
                                  augment.scale_jitter_test, search_factor,
                                  out_px)
        patch, _ = crop.extract(sequence.frame(index))
        box = crop.box_to_patch(gt)
        if flip:
            patch = patch[:, ::-1]
            box = box.flipped(out_px)
        patch = np.clip(patch.astype(np.float32) * gains, 0, 255)
        patches.append(patch.astype(np.uint8))
        boxes.append(box)

    return TrainingTriplet(np.stack(patches[:2]), boxes[:2], patches[2],
                           boxes[2], indices, bool(flip))


class TripletDataset(Dataset):
    """
    Item i is the triplet drawn with a generator seeded by (seed, i), so any
    worker produces the same batch for the same step.
    """

    def __init__(self, sequences: Sequence, config: TrainConfig):
        if not sequences:
            raise ValueError("No training sequences")
        self.sequences = sequences
        self.config = config

    def __len__(self) -> int:
        return self.config.steps * self.config.batch_size

    def __getitem__(self, index: int) -> TrainingTriplet:
        cfg = self.config
        rng = np.random.default_rng([cfg.seed, index])
        sequence = self.sequences[int(rng.integers(len(self.sequences)))]
        return sample_triplet(sequence, cfg.window, rng,
                              cfg.model.patch_size, cfg.model.search_factor,
                              cfg.augmentation)


def collate_triplets(triplets: Sequence[TrainingTriplet]) -> TripletBatch:
    return TripletBatch(
        train_patches=patch_to_tensor(
            np.stack([t.train_patches for t in triplets])),
        train_boxes=[list(t.train_boxes) for t in triplets],
        test_patch=patch_to_tensor(np.stack([t.test_patch for t in triplets])),
        test_boxes=[t.test_box for t in triplets])
