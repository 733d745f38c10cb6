from pathlib import Path
from typing import Iterator, List

import cv2
import numpy as np

from tompTracker.Models.Fields.boxXYWH import BoxXYWH


class SequenceDataset:
    """
    A sequence on disk: ordered frame images with one ground-truth box per
    frame. Frames are read on access.
    """

    def __init__(self, name: str, frame_paths: List[Path],
                 boxes: np.ndarray):
        if len(frame_paths) != len(boxes):
            raise ValueError(
                f"Sequence {name} has {len(frame_paths)} frames but "
                f"{len(boxes)} ground-truth boxes")
        self.name = name
        self.frame_paths = list(frame_paths)
        self.boxes = np.asarray(boxes, dtype=float).reshape(-1, 4)

    def __len__(self) -> int:
        return len(self.frame_paths)

    def frame(self, index: int) -> np.ndarray:
        path = self.frame_paths[index]
        image = cv2.imread(str(path), cv2.IMREAD_COLOR)
        if image is None:
            raise ValueError(f"Unreadable frame: {path}")
        return image

    def frames(self) -> Iterator[np.ndarray]:
        for index in range(len(self)):
            yield self.frame(index)

    def init_box(self) -> BoxXYWH:
        return BoxXYWH.from_sequence(self.boxes[0])
