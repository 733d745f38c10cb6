"""
Online tracking loop: sample memory, confidence-gated updates and the
two-stage masked model prediction.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np
import torch

from tompTracker.baseline_dcf import DCFProblem, dcf_optimize
from tompTracker.config import TrackerConfig
from tompTracker.errors import InvalidPredictionError
from tompTracker.geometry import make_crop
from tompTracker.heads import decode_prediction, regress_boxes, target_scores
from tompTracker.Models.Entities.tiny_backbone import patch_to_tensor
from tompTracker.Models.Entities.tomp_net import TompNet
from tompTracker.Models.Entities.tracker_state import (
    MemorySample,
    TrackerState
)
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Models.Fields.cropTransform import CropTransform


logger = logging.getLogger(__name__)

MIN_BOX_SIZE = 4.0


@dataclass
class TwoStagePrediction:
    w_cls: torch.Tensor
    z_cls: torch.Tensor
    w_bbreg: torch.Tensor
    z_box: torch.Tensor


@dataclass
class TrackResult:
    state: TrackerState
    box: BoxXYWH
    confidence: float


class Tracker:
    """
    Tracks one target per TrackerState. The network is only read, so one
    Tracker may serve many sequences at once.
    """

    def __init__(self, net: TompNet, config: Optional[TrackerConfig] = None):
        self.net = net.eval()
        self.config = config or TrackerConfig()
        self.model_config = net.config
        self.device = next(net.parameters()).device
        if self.config.predictor == "initial":
            raise ValueError("Use KeepInitialTracker for the initial-box "
                             "baseline")

    @property
    def patch_size(self) -> int:
        return self.model_config.patch_size

    @property
    def search_factor(self) -> float:
        # crops must match the context the model was trained with
        return self.model_config.search_factor

    def _features(self, patch: np.ndarray) -> torch.Tensor:
        tensor = patch_to_tensor(patch).unsqueeze(0).to(self.device)
        return self.net.extract_features(tensor)

    def _sample(self, patch: np.ndarray, box: BoxXYWH, confidence: float,
                is_initial: bool, frame_index: int,
                label_source: str) -> MemorySample:
        x = self._features(patch)
        label, ltrb = self.net.make_labels([box], x)
        return MemorySample(x, label, ltrb, box, confidence, is_initial,
                            frame_index, label_source)

    def init(self, frame: np.ndarray, box: BoxXYWH) -> TrackerState:
        """
        Build the state from the annotated first frame.
        """
        height, width = frame.shape[:2]
        x1, y1, x2, y2 = box.to_xyxy()
        if x1 >= width or y1 >= height or x2 <= 0 or y2 <= 0:
            raise ValueError(f"Initial box {box} lies outside the frame")
        cfg = self.config
        state = TrackerState(box, cfg.memory_capacity, cfg.num_initial)
        crop = make_crop(box, self.search_factor, self.patch_size)
        rng = np.random.default_rng(cfg.seed)
        with torch.no_grad():
            patch, _ = crop.extract(frame)
            state.add_sample(self._sample(patch, crop.box_to_patch(box), 1.0,
                                          True, 0, "annotation"))
            for copy in range(1, cfg.num_initial):
                shift = rng.uniform(-0.25, 0.25, size=2) * box.base_size()
                moved = CropTransform(crop.scale, crop.offset_x + shift[0],
                                      crop.offset_y + shift[1], crop.out_px)
                patch, _ = moved.extract(frame)
                patch_box = moved.box_to_patch(box)
                if copy % 2 == 1:
                    patch = np.ascontiguousarray(patch[::-1])
                    patch_box = patch_box.flipped_vertical(self.patch_size)
                state.add_sample(self._sample(patch, patch_box, 1.0, True,
                                              0, "annotation"))
        logger.debug("Tracker initialized at %s with %d initial samples",
                     box, len(state.memory))
        return state

    def predict_two_stage(self, state: TrackerState,
                          x_test: torch.Tensor) -> TwoStagePrediction:
        """
        Stage 1 sees the whole memory and yields w_cls; stage 2 masks every
        recent frame and yields w_bbreg. Both run as one batch of two.
        """
        samples = state.memory
        if not samples:
            raise ValueError("Tracker memory is empty")
        x_train = [s.features for s in samples]
        labels = [s.label for s in samples]
        ltrbs = [s.ltrb for s in samples]
        if not self.config.two_stage:
            weights, z = self.net.predict(x_train, labels, ltrbs, x_test)
            return TwoStagePrediction(weights.w_cls, z, weights.w_bbreg, z)

        def doubled(maps):
            return [torch.cat([m, m]) for m in maps]

        mask = torch.tensor([[False] * len(samples),
                             [not s.is_initial for s in samples]],
                            device=x_test.device)
        weights, z = self.net.predict(doubled(x_train), doubled(labels),
                                      doubled(ltrbs),
                                      torch.cat([x_test, x_test]), mask)
        return TwoStagePrediction(weights.w_cls[:1], z[:1],
                                  weights.w_bbreg[1:], z[1:])

    def _dcf_filter(self, state: TrackerState) -> torch.Tensor:
        features = torch.cat([s.features for s in state.memory]).double()
        labels = torch.cat([s.label for s in state.memory]).double()
        problem = DCFProblem(features, labels, reg=self.config.dcf_reg)
        w, _ = dcf_optimize(problem, self.config.dcf_iters)
        return w.to(state.memory[0].features.dtype).unsqueeze(0)

    def _scores_and_ltrb(self, state: TrackerState, x_test: torch.Tensor):
        prediction = self.predict_two_stage(state, x_test)
        if self.config.predictor == "dcf":
            scores = target_scores(self._dcf_filter(state), x_test)
        else:
            scores = target_scores(prediction.w_cls, prediction.z_cls)
        ltrb = regress_boxes(prediction.w_bbreg, prediction.z_box,
                             self.net.box_head)
        return scores, ltrb

    def track(self, state: TrackerState, frame: np.ndarray) -> TrackResult:
        cfg = self.config
        crop = make_crop(state.box, self.search_factor, self.patch_size)
        patch, _ = crop.extract(frame)
        state.frame_index += 1
        with torch.no_grad():
            x_test = self._features(patch)
            scores, ltrb = self._scores_and_ltrb(state, x_test)
            confidence = float(scores.max())
            try:
                box, confidence = decode_prediction(
                    scores[0], ltrb[0], crop, self.model_config.stride)
            except InvalidPredictionError as e:
                logger.warning("Frame %d: %s", state.frame_index, e)
                box = None

            state.found = box is not None and \
                confidence >= cfg.not_found_threshold
            if state.found:
                state.box = clamp_box(box, frame.shape)
                label, target = self.net.make_labels(
                    [crop.box_to_patch(state.box)], x_test)
                sample = MemorySample(x_test, label, target,
                                      crop.box_to_patch(state.box),
                                      confidence, False, state.frame_index,
                                      "prediction")
                self.update_memory(state, sample, confidence)
        logger.debug("Frame %d: confidence %.3f, found=%s",
                     state.frame_index, confidence, state.found)
        return TrackResult(state, state.box, confidence)

    def update_memory(self, state: TrackerState, sample: MemorySample,
                      confidence: float,
                      eta: Optional[float] = None) -> TrackerState:
        """
        Keep the sample as the newest recent frame when its confidence
        exceeds eta.
        """
        eta = self.config.eta if eta is None else eta
        if confidence > eta:
            state.add_sample(sample)
            logger.debug("Memory updated with frame %d", sample.frame_index)
        return state


class KeepInitialTracker:
    """
    Baseline that reports the initial box on every frame.
    """

    def init(self, frame: np.ndarray, box: BoxXYWH) -> TrackerState:
        return TrackerState(box)

    def track(self, state: TrackerState, frame: np.ndarray) -> TrackResult:
        state.frame_index += 1
        return TrackResult(state, state.box, 1.0)


def clamp_box(box: BoxXYWH, frame_shape) -> BoxXYWH:
    """
    Keep the box centre inside the frame and its size between
    MIN_BOX_SIZE and the frame size.
    """
    height, width = frame_shape[:2]
    w = float(np.clip(box.w, MIN_BOX_SIZE, max(MIN_BOX_SIZE, width)))
    h = float(np.clip(box.h, MIN_BOX_SIZE, max(MIN_BOX_SIZE, height)))
    cx, cy = box.center()
    cx = float(np.clip(cx, 0.0, width))
    cy = float(np.clip(cy, 0.0, height))
    return BoxXYWH(cx - 0.5 * w, cy - 0.5 * h, w, h, "image")


def run_sequence(tracker, frames: Iterable[np.ndarray],
                 init_box: BoxXYWH) -> List[BoxXYWH]:
    """
    One-pass evaluation: initialize on the first frame, report the given
    box for it, then track every later frame.
    """
    boxes = []
    state = None
    for frame in frames:
        if state is None:
            state = tracker.init(frame, init_box)
            boxes.append(init_box)
            continue
        boxes.append(tracker.track(state, frame).box)
    return boxes
