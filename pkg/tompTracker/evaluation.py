"""
One-pass evaluation: success, precision and normalized precision, per
sequence and averaged over a dataset.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from tqdm import tqdm

from tompTracker.builder import load_dataset
from tompTracker.Models.Entities.sequence_dataset import SequenceDataset
from tompTracker.tracker import run_sequence
from tompTracker.Views.results import read_results, write_results


logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
IOU_THRESHOLDS = np.linspace(0.0, 1.0, 101)
PIXEL_THRESHOLDS = np.arange(0, 51, dtype=float)
NORM_THRESHOLDS = np.linspace(0.0, 0.5, 51)
PRECISION_PX = 20.0
FULL_OVERLAP_EPS = 1e-9


def _check_pair(pred, gt):
    pred = np.asarray(pred, dtype=float).reshape(-1, 4)
    gt = np.asarray(gt, dtype=float).reshape(-1, 4)
    if len(pred) != len(gt):
        raise ValueError(f"{len(pred)} predicted boxes against {len(gt)} "
                         "ground-truth boxes")
    return pred, gt


def overlaps(pred, gt) -> np.ndarray:
    """
    Per-frame IoU of (N, 4) xywh arrays.
    """
    pred, gt = _check_pair(pred, gt)
    x1 = np.maximum(pred[:, 0], gt[:, 0])
    y1 = np.maximum(pred[:, 1], gt[:, 1])
    x2 = np.minimum(pred[:, 0] + pred[:, 2], gt[:, 0] + gt[:, 2])
    y2 = np.minimum(pred[:, 1] + pred[:, 3], gt[:, 1] + gt[:, 3])
    inter = np.clip(x2 - x1, 0, None) * np.clip(y2 - y1, 0, None)
    union = pred[:, 2] * pred[:, 3] + gt[:, 2] * gt[:, 3] - inter
    return inter / union


def center_offsets(pred, gt) -> np.ndarray:
    pred, gt = _check_pair(pred, gt)
    return (pred[:, :2] + 0.5 * pred[:, 2:]) - (gt[:, :2] + 0.5 * gt[:, 2:])


def success_curve(pred, gt):
    """
    Fraction of frames with IoU strictly above each of 101 thresholds on
    [0, 1]. A full overlap succeeds at every threshold, including 1.

    Returns:
        (curve, AUC) where AUC is the mean of the curve
    """
    ious = overlaps(pred, gt)[:, None]
    hits = (ious > IOU_THRESHOLDS[None, :]) | (ious >= 1.0 - FULL_OVERLAP_EPS)
    curve = hits.mean(axis=0)
    return curve, float(curve.mean())


def precision_curve(pred, gt) -> np.ndarray:
    distances = np.linalg.norm(center_offsets(pred, gt), axis=1)
    return (distances[:, None] <= PIXEL_THRESHOLDS[None, :]).mean(axis=0)


def precision(pred, gt, d_px: float = PRECISION_PX) -> float:
    """
    Fraction of frames whose centre error is at most d_px pixels.
    """
    distances = np.linalg.norm(center_offsets(pred, gt), axis=1)
    return float((distances <= d_px).mean())


def norm_precision_curve(pred, gt) -> np.ndarray:
    pred, gt = _check_pair(pred, gt)
    distances = np.linalg.norm(center_offsets(pred, gt) / gt[:, 2:], axis=1)
    return (distances[:, None] <= NORM_THRESHOLDS[None, :]).mean(axis=0)


def norm_precision_auc(pred, gt) -> float:
    """
    Centre error divided per axis by the ground-truth size, thresholded at
    51 points of [0, 0.5] and averaged.
    """
    return float(norm_precision_curve(pred, gt).mean())


def mean_iou(pred, gt) -> float:
    return float(overlaps(pred, gt).mean())


@dataclass
class SequenceMetrics:
    name: str
    frames: int
    success_auc: float
    precision: float
    norm_precision_auc: float
    mean_iou: float
    success_curve: List[float] = field(repr=False)
    precision_curve: List[float] = field(repr=False)
    norm_precision_curve: List[float] = field(repr=False)


def sequence_metrics(name: str, pred, gt) -> SequenceMetrics:
    curve, auc = success_curve(pred, gt)
    norm_curve = norm_precision_curve(pred, gt)
    return SequenceMetrics(
        name=name,
        frames=len(gt),
        success_auc=auc,
        precision=precision(pred, gt),
        norm_precision_auc=float(norm_curve.mean()),
        mean_iou=mean_iou(pred, gt),
        success_curve=curve.tolist(),
        precision_curve=precision_curve(pred, gt).tolist(),
        norm_precision_curve=norm_curve.tolist())


SCALAR_METRICS = ("success_auc", "precision", "norm_precision_auc",
                  "mean_iou")
CURVE_METRICS = ("success_curve", "precision_curve", "norm_precision_curve")


@dataclass
class MetricReport:
    """
    Per-sequence metrics, ordered by name, and their unweighted means.
    """
    sequences: List[SequenceMetrics]
    schema_version: int = REPORT_SCHEMA_VERSION

    def __post_init__(self):
        self.sequences = sorted(self.sequences, key=lambda s: s.name)

    def aggregate(self) -> Dict[str, float]:
        if not self.sequences:
            return {key: 0.0 for key in SCALAR_METRICS}
        return {key: float(np.mean([getattr(s, key) for s in self.sequences]))
                for key in SCALAR_METRICS}

    def mean_curve(self, key: str) -> np.ndarray:
        if key not in CURVE_METRICS:
            raise ValueError(f"Unknown curve: {key}")
        return np.mean([getattr(s, key) for s in self.sequences], axis=0)

    def to_dict(self) -> Dict:
        return {
            "schema_version": self.schema_version,
            "aggregate": self.aggregate(),
            "sequences": [asdict(s) for s in self.sequences],
        }

    @classmethod
    def from_dict(cls, values: Dict) -> "MetricReport":
        version = values.get("schema_version")
        if version != REPORT_SCHEMA_VERSION:
            raise ValueError(f"Unsupported report schema version: {version}")
        return cls([SequenceMetrics(**s) for s in values["sequences"]],
                   version)


def run_eval(dataset_dir, results_dir) -> MetricReport:
    """
    Score <results_dir>/<sequence>.txt against every sequence's ground
    truth.

    Raises:
        FileNotFoundError: Naming every sequence without a results file
    """
    dataset = load_dataset(dataset_dir)
    results = Path(results_dir)
    missing = [s.name for s in dataset
               if not (results / f"{s.name}.txt").exists()]
    if missing:
        raise FileNotFoundError(
            f"No results in {results_dir} for: " + ", ".join(missing))
    metrics = []
    for sequence in dataset:
        pred = read_results(results / f"{sequence.name}.txt")
        try:
            metrics.append(sequence_metrics(sequence.name, pred,
                                            sequence.boxes))
        except ValueError as e:
            raise ValueError(f"Sequence {sequence.name}: {e}") from e
    report = MetricReport(metrics)
    logger.info("Evaluated %d sequences: %s", len(metrics),
                ", ".join(f"{k} {v:.3f}"
                          for k, v in report.aggregate().items()))
    return report


def track_sequence(tracker, sequence: SequenceDataset, output_dir) -> Path:
    boxes = run_sequence(tracker, sequence.frames(), sequence.init_box())
    return write_results(Path(output_dir) / f"{sequence.name}.txt", boxes)


def track_dataset(dataset_dir, output_dir, tracker, workers: int = 1,
                  dataset: Optional[List[SequenceDataset]] = None
                  ) -> List[Path]:
    """
    Run one-pass tracking over every sequence and write one results file
    each. Lanes share the one tracker; per-sequence state lives in each
    TrackerState, so only the read-only weights are shared.
    """
    if dataset is None:
        dataset = load_dataset(dataset_dir)
    if workers < 1:
        raise ValueError(f"workers must be >= 1: {workers}")

    def lane(sequence):
        return track_sequence(tracker, sequence, output_dir)

    if workers == 1:
        return [lane(s) for s in tqdm(dataset, desc="track", unit="seq")]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(lane, dataset), total=len(dataset),
                         desc="track", unit="seq"))
