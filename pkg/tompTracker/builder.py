"""
Helper utilities for building datasets and trackers from directories.

A dataset directory holds one subdirectory per sequence:

    dataset/
        seq_000/
            00000001.png
            00000002.png
            ...
            groundtruth.txt   - one "x,y,w,h" line per frame
"""
import logging
import re
from pathlib import Path
from typing import List, Optional

import numpy as np

from tompTracker.config import TrackerConfig
from tompTracker.Models.Entities.sequence_dataset import SequenceDataset
from tompTracker.tracker import KeepInitialTracker, Tracker
from tompTracker.Views.checkpoint import load_checkpoint


logger = logging.getLogger(__name__)

FRAME_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")
GROUNDTRUTH_NAME = "groundtruth.txt"


def read_groundtruth(path) -> np.ndarray:
    """
    Parse x,y,w,h lines; commas, tabs and spaces all separate values.

    Raises:
        ValueError: If a line does not hold four finite numbers
    """
    boxes = []
    with open(path, "r") as f:
        for number, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [v for v in re.split(r"[,\s]+", line) if v]
            try:
                values = [float(v) for v in fields]
            except ValueError:
                values = []
            if len(values) != 4 or not np.all(np.isfinite(values)):
                raise ValueError(
                    f"{path}:{number}: expected x,y,w,h, got {line!r}")
            boxes.append(values)
    return np.array(boxes, dtype=float).reshape(-1, 4)


def load_sequence(directory) -> SequenceDataset:
    """
    Raises:
        FileNotFoundError: If the directory or its groundtruth.txt is missing
        ValueError: If frames and ground-truth lines disagree in number
    """
    path = Path(directory)
    if not path.is_dir():
        raise FileNotFoundError(f"Sequence directory not found: {directory}")
    groundtruth = path / GROUNDTRUTH_NAME
    if not groundtruth.exists():
        raise FileNotFoundError(f"Missing {GROUNDTRUTH_NAME} in {directory}")
    frames = sorted(p for p in path.iterdir()
                    if p.suffix.lower() in FRAME_SUFFIXES)
    if not frames:
        raise ValueError(f"No frame images found in {directory}")
    return SequenceDataset(path.name, frames, read_groundtruth(groundtruth))


def load_dataset(dataset_dir) -> List[SequenceDataset]:
    """
    Load every sequence of a dataset directory, ordered by name.

    Raises:
        FileNotFoundError: If dataset_dir doesn't exist
        ValueError: If dataset_dir holds no sequences
    """
    root = Path(dataset_dir)
    if not root.exists():
        raise FileNotFoundError(f"Dataset directory not found: {dataset_dir}")
    if not root.is_dir():
        raise ValueError(f"Dataset path is not a directory: {dataset_dir}")
    sequences = [load_sequence(p) for p in sorted(root.iterdir())
                 if p.is_dir() and (p / GROUNDTRUTH_NAME).exists()]
    if not sequences:
        raise ValueError(
            f"No sequences found in {dataset_dir}. Expected subdirectories "
            f"holding frames and a {GROUNDTRUTH_NAME}")
    logger.info("Loaded %d sequences from %s", len(sequences), dataset_dir)
    return sequences


def build_tracker(config: TrackerConfig, checkpoint: Optional[str] = None):
    """
    A tracker for the configured predictor; the initial-box baseline needs
    no checkpoint.
    """
    if config.predictor == "initial":
        return KeepInitialTracker()
    if checkpoint is None:
        raise ValueError(f"The {config.predictor} predictor needs a "
                         "checkpoint")
    net, _ = load_checkpoint(checkpoint)
    logger.info("Loaded %s; search factor %.2f, patch size %d", checkpoint,
                net.config.search_factor, net.config.patch_size)
    return Tracker(net, config)
