"""
Example usage of the tompTracker package.

Synthesizes a small dataset, trains a desk-scale network for a few hundred
steps, then tracks and scores it against the keep-the-initial-box baseline.
"""
import logging
from pathlib import Path

from tompTracker.builder import build_tracker
from tompTracker.config import ModelConfig, TrackerConfig, TrainConfig
from tompTracker.config import TransformerConfig
from tompTracker.evaluation import run_eval, track_dataset
from tompTracker.synthetic import dataset_specs, write_dataset
from tompTracker.trainer import train
from tompTracker.Views.plots import plot_reports
from tompTracker.Views.report import write_report


def example_config(output: Path) -> TrainConfig:
    model = ModelConfig(channels=32, backbone_channels=16, score_size=12,
                        extent_hidden=(16, 32), head_width=32,
                        transformer=TransformerConfig(heads=4,
                                                      ffn_width=64))
    return TrainConfig(steps=300, batch_size=4, lr=2e-4, window=60,
                       num_sequences=8, sequence_length=120,
                       checkpoint_every=100, log_every=25,
                       output_dir=str(output / "run"), model=model)


def main(output: Path = Path("example_output")):
    logging.basicConfig(level=logging.INFO)
    data = output / "data"
    write_dataset(data, dataset_specs(4, 80, seed=1))

    result = train(example_config(output))

    reports = {}
    for label, predictor in (("tomp", "transformer"), ("dcf", "dcf"),
                             ("initial", "initial")):
        tracker = build_tracker(TrackerConfig(predictor=predictor),
                                result.checkpoint)
        results = output / "results" / label
        track_dataset(data, results, tracker, workers=2)
        reports[label] = run_eval(data, results)
        write_report(reports[label], results)
        print(label, reports[label].aggregate())
    plot_reports(reports, output / "plots")


if __name__ == "__main__":
    main()
