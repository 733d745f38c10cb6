"""
Offline training on synthetic sequences.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np
import torch
from torch.utils.data import DataLoader
from tqdm import tqdm

from tompTracker.config import TrainConfig, save_config
from tompTracker.errors import NonFiniteError
from tompTracker.Models.Entities.tomp_net import TompNet
from tompTracker.objectives import (
    center_mask,
    loss_cls,
    loss_giou,
    loss_total
)
from tompTracker.sampler import TripletBatch, TripletDataset, collate_triplets
from tompTracker.synthetic import dataset_specs, generate_sequence
from tompTracker.Views.checkpoint import (
    load_checkpoint,
    save_checkpoint
)


logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.pth"
TRACE_NAME = "loss_trace.csv"


@dataclass
class LossRecord:
    step: int
    l_cls: float
    l_giou: float
    l_tot: float

    def to_row(self) -> List[float]:
        return [self.step, self.l_cls, self.l_giou, self.l_tot]


@dataclass
class TrainResult:
    checkpoint: Path
    trace: List[LossRecord]


def learning_rate(config: TrainConfig, step: int) -> float:
    """
    Base rate, multiplied by lr_decay at every milestone already passed.
    """
    passed = sum(1 for milestone in config.milestones() if step >= milestone)
    return config.lr * config.lr_decay ** passed


def build_sequences(config: TrainConfig):
    specs = dataset_specs(config.num_sequences, config.sequence_length,
                          config.seed, config.distractors,
                          config.canvas_width, config.canvas_height)
    return [generate_sequence(spec, f"train_{i:03d}")
            for i, spec in enumerate(specs)]


def step_losses(net: TompNet, batch: TripletBatch, config: TrainConfig):
    """
    Returns:
        (L_cls, L_giou, L_tot) of one batch
    """
    scores, ltrb = net(batch.train_patches, batch.train_boxes,
                       batch.test_patch)
    label, target = net.make_labels(batch.test_boxes, scores)
    tau = config.loss.tau
    l_cls = loss_cls(scores, label, tau)
    if config.giou_center_only:
        fg_mask = center_mask(label)
    else:
        fg_mask = label > tau
    l_giou = loss_giou(ltrb, target, fg_mask)
    return l_cls, l_giou, loss_total(l_cls, l_giou, config.loss)


def smoothed(trace: Sequence[LossRecord], window: int = 50) -> np.ndarray:
    """
    Moving average of L_tot.
    """
    values = np.array([record.l_tot for record in trace], dtype=float)
    if len(values) == 0:
        return values
    window = max(1, min(window, len(values)))
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


def write_trace(trace: Sequence[LossRecord], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "L_cls", "L_giou", "L_tot"])
        for record in trace:
            writer.writerow([record.step, repr(record.l_cls),
                             repr(record.l_giou), repr(record.l_tot)])
    return path


def train(config: TrainConfig, sequences=None) -> TrainResult:
    """
    Train a TompNet with AdamW. Step k draws its batch from items
    (seed, k * batch_size ...) of the triplet dataset and seeds dropout from
    (seed, k), so a run resumed from a checkpoint repeats the uninterrupted
    run exactly.

    sequences: training sequences; synthesized from the config when None.

    Raises:
        NonFiniteError: If a loss becomes NaN or infinite
    """
    output = Path(config.output_dir)
    output.mkdir(parents=True, exist_ok=True)
    save_config(config, output / "config.yaml")

    torch.manual_seed(config.seed)
    net = TompNet(config.model)
    optimizer = torch.optim.AdamW(net.parameters(), lr=config.lr,
                                  weight_decay=config.weight_decay)
    start = 0
    trace: List[LossRecord] = []
    if config.resume:
        net, checkpoint = load_checkpoint(config.resume, net)
        if checkpoint.optimizer is not None:
            optimizer.load_state_dict(checkpoint.optimizer)
        start = checkpoint.step
        trace = [LossRecord(int(row[0]), *row[1:])
                 for row in checkpoint.trace]
        logger.info("Resuming from %s at step %d", config.resume, start)

    if sequences is None:
        sequences = build_sequences(config)
    dataset = TripletDataset(sequences, config)
    indices = range(start * config.batch_size,
                    config.steps * config.batch_size)
    loader = DataLoader(dataset, batch_size=config.batch_size,
                        sampler=indices, num_workers=config.num_workers,
                        collate_fn=collate_triplets)

    checkpoint_path = output / CHECKPOINT_NAME
    net.train()
    progress = tqdm(loader, total=config.steps - start, initial=0,
                    desc="train", unit="step")
    for step, batch in enumerate(progress, start=start):
        torch.manual_seed(config.seed * 1_000_003 + step)
        for group in optimizer.param_groups:
            group["lr"] = learning_rate(config, step)

        l_cls, l_giou, l_tot = step_losses(net, batch, config)
        if not torch.isfinite(l_tot):
            raise NonFiniteError(
                f"Non-finite loss at step {step}: L_cls={float(l_cls)}, "
                f"L_giou={float(l_giou)}")
        optimizer.zero_grad()
        l_tot.backward()
        optimizer.step()

        record = LossRecord(step + 1, float(l_cls), float(l_giou),
                            float(l_tot))
        trace.append(record)
        if record.step % config.log_every == 0:
            logger.info("step %d: L_cls %.5f, L_giou %.4f, L_tot %.4f, "
                        "lr %.2e", record.step, record.l_cls, record.l_giou,
                        record.l_tot, optimizer.param_groups[0]["lr"])
            progress.set_postfix(loss=f"{record.l_tot:.4f}")
        if config.checkpoint_every and \
                record.step % config.checkpoint_every == 0:
            save_checkpoint(output / f"checkpoint_{record.step:06d}.pth",
                            net, config, optimizer, record.step,
                            [r.to_row() for r in trace])

    save_checkpoint(checkpoint_path, net, config, optimizer, config.steps,
                    [r.to_row() for r in trace])
    write_trace(trace, output / TRACE_NAME)
    if len(trace) >= 2:
        curve = smoothed(trace, config.log_every)
        logger.info("Smoothed L_tot went from %.4f to %.4f", curve[0],
                    curve[-1])
    return TrainResult(checkpoint_path, trace)
