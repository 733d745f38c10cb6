"""
Command-line surface: synth, train, track, eval, plot and calibrate.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import torch

from tompTracker.builder import build_tracker, load_dataset
from tompTracker.calibration import run_calibration
from tompTracker.config import PREDICTORS, TrackerConfig, load_config
from tompTracker.errors import CheckpointError, NonFiniteError
from tompTracker.evaluation import run_eval, track_dataset
from tompTracker.synthetic import dataset_specs, write_dataset
from tompTracker.trainer import train
from tompTracker.Views.plots import plot_reports
from tompTracker.Views.report import read_report, write_report


logger = logging.getLogger(__name__)


def _seed_everything(seed: int) -> None:
    np.random.seed(seed)
    torch.manual_seed(seed)


def cmd_synth(args) -> int:
    specs = dataset_specs(args.sequences, args.length, args.seed,
                          args.distractors, args.width, args.height)
    write_dataset(args.output, specs)
    return 0


def cmd_train(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.steps is not None:
        config.steps = args.steps
    if args.output is not None:
        config.output_dir = args.output
    if args.resume is not None:
        config.resume = args.resume
    result = train(config)
    print(result.checkpoint)
    return 0


def cmd_track(args) -> int:
    defaults = TrackerConfig()
    config = TrackerConfig(
        eta=defaults.eta if args.eta is None else args.eta,
        memory_capacity=(defaults.memory_capacity if args.memory is None
                         else args.memory),
        num_initial=args.initial,
        predictor=args.predictor,
        two_stage=not args.no_two_stage,
        seed=args.seed if args.seed is not None else defaults.seed)
    tracker = build_tracker(config, args.checkpoint)
    dataset = load_dataset(args.dataset)
    track_dataset(args.dataset, args.output, tracker, args.workers, dataset)
    logger.info("Tracked %d sequences into %s", len(dataset), args.output)
    return 0


def cmd_eval(args) -> int:
    report = run_eval(args.dataset, args.results)
    write_report(report, args.output or args.results)
    for key, value in report.aggregate().items():
        print(f"{key}: {value:.4f}")
    return 0


def cmd_plot(args) -> int:
    reports = {}
    for entry in args.reports:
        label, _, path = entry.rpartition("=")
        reports[label or Path(path).stem] = read_report(path)
    plot_reports(reports, args.output)
    return 0


def cmd_calibrate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.steps is not None:
        config.steps = args.steps
    record = run_calibration(config, args.output, args.sequences,
                             args.length, args.workers)
    print(f"loss_ratio: {record.loss_ratio:.4f}")
    for predictor, scores in record.scores.items():
        print(f"{predictor}: mean_iou {scores['mean_iou']:.4f}, "
              f"success_auc {scores['success_auc']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="random seed (default: 0 or the config's)")
    common.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(
        prog="tomp-tracker",
        description="Transformer model prediction tracker at desk scale")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", parents=[common],
                           help="generate a synthetic dataset")
    synth.add_argument("output", help="dataset directory to create")
    synth.add_argument("--sequences", type=int, default=20)
    synth.add_argument("--length", type=int, default=150)
    synth.add_argument("--distractors", type=int, default=2)
    synth.add_argument("--width", type=int, default=320)
    synth.add_argument("--height", type=int, default=240)
    synth.set_defaults(func=cmd_synth)

    trainer = sub.add_parser("train", parents=[common],
                             help="train on synthetic sequences")
    trainer.add_argument("config", help="flat YAML config file")
    trainer.add_argument("--steps", type=int, default=None)
    trainer.add_argument("--output", default=None,
                         help="run directory (overrides output_dir)")
    trainer.add_argument("--resume", default=None,
                         help="checkpoint to continue from")
    trainer.set_defaults(func=cmd_train)

    track = sub.add_parser("track", parents=[common],
                           help="one-pass tracking over a dataset")
    track.add_argument("--checkpoint", default=None)
    track.add_argument("--dataset", required=True)
    track.add_argument("--output", required=True,
                       help="directory for <sequence>.txt results")
    track.add_argument("--predictor", choices=PREDICTORS,
                       default="transformer")
    track.add_argument("--no-two-stage", action="store_true")
    track.add_argument("--memory", type=int, default=None,
                       help="total number of memory samples")
    track.add_argument("--initial", type=int, default=1,
                       help="annotated samples kept from the first frame")
    track.add_argument("--eta", type=float, default=None)
    track.add_argument("--workers", type=int, default=1)
    track.set_defaults(func=cmd_track)

    evaluate = sub.add_parser("eval", parents=[common],
                              help="score results against ground truth")
    evaluate.add_argument("--dataset", required=True)
    evaluate.add_argument("--results", required=True)
    evaluate.add_argument("--output", default=None,
                          help="report directory (default: results dir)")
    evaluate.set_defaults(func=cmd_eval)

    calibrate = sub.add_parser(
        "calibrate", parents=[common],
        help="train, then score every predictor on held-out sequences")
    calibrate.add_argument("config", help="flat YAML config file")
    calibrate.add_argument("--output", required=True,
                           help="directory for the run, data and record")
    calibrate.add_argument("--steps", type=int, default=None)
    calibrate.add_argument("--sequences", type=int, default=20)
    calibrate.add_argument("--length", type=int, default=150)
    calibrate.add_argument("--workers", type=int, default=1)
    calibrate.set_defaults(func=cmd_calibrate)

    plot = sub.add_parser("plot", parents=[common],
                          help="curve images from one or more reports")
    plot.add_argument("reports", nargs="+",
                      help="report.json paths, optionally as label=path")
    plot.add_argument("--output", required=True)
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if args.seed is not None:
        _seed_everything(args.seed)
    elif args.command not in ("train", "calibrate"):
        args.seed = 0
        _seed_everything(0)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, CheckpointError,
            NonFiniteError) as e:
        logger.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
