"""
Reference calibration: train from a config, then track a held-out synthetic
dataset with every predictor and record the loss drop and the scores.
"""
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict

from tompTracker.builder import build_tracker, load_dataset
from tompTracker.config import PREDICTORS, TrackerConfig, TrainConfig
from tompTracker.evaluation import run_eval, track_dataset
from tompTracker.synthetic import dataset_specs, write_dataset
from tompTracker.trainer import smoothed, train
from tompTracker.Views.report import write_report


logger = logging.getLogger(__name__)

CALIBRATION_NAME = "calibration.json"
# held-out sequences never share a seed with the training sequences
HELDOUT_SEED_OFFSET = 1000


@dataclass
class CalibrationRecord:
    seed: int
    steps: int
    heldout_sequences: int
    initial_loss: float
    final_loss: float
    scores: Dict[str, Dict[str, float]] = field(default_factory=dict)

    @property
    def loss_ratio(self) -> float:
        return self.final_loss / self.initial_loss

    def to_dict(self) -> Dict:
        values = asdict(self)
        values["loss_ratio"] = self.loss_ratio
        return values

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def run_calibration(config: TrainConfig, output, heldout: int = 20,
                    length: int = 150, workers: int = 1
                    ) -> CalibrationRecord:
    """
    Train into <output>/run, synthesize <output>/heldout and score every
    predictor on it. The record is also written to <output>/calibration.json.

    Raises:
        ValueError: If training produced fewer than two loss records
    """
    output = Path(output)
    config = replace(config, output_dir=str(output / "run"), resume=None)
    result = train(config)
    if len(result.trace) < 2:
        raise ValueError("Calibration needs at least two training steps")
    curve = smoothed(result.trace, config.log_every)

    specs = dataset_specs(heldout, length, config.seed + HELDOUT_SEED_OFFSET,
                          config.distractors, config.canvas_width,
                          config.canvas_height)
    dataset_dir = write_dataset(output / "heldout", specs)
    dataset = load_dataset(dataset_dir)

    record = CalibrationRecord(config.seed, config.steps, heldout,
                               float(curve[0]), float(curve[-1]))
    for predictor in PREDICTORS:
        tracker = build_tracker(
            TrackerConfig(predictor=predictor, seed=config.seed),
            str(result.checkpoint))
        results = output / "results" / predictor
        track_dataset(dataset_dir, results, tracker, workers, dataset)
        report = run_eval(dataset_dir, results)
        write_report(report, results)
        record.scores[predictor] = report.aggregate()
        logger.info("%s: mean IoU %.3f, success AUC %.3f", predictor,
                    record.scores[predictor]["mean_iou"],
                    record.scores[predictor]["success_auc"])
    record.write(output / CALIBRATION_NAME)
    logger.info("Smoothed loss went from %.4f to %.4f (ratio %.3f)",
                record.initial_loss, record.final_loss, record.loss_ratio)
    return record
