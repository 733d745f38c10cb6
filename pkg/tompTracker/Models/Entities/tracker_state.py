from dataclasses import dataclass
from typing import List

import torch

from tompTracker.Models.Fields.boxXYWH import BoxXYWH


@dataclass(eq=False)
class MemorySample:
    """
    One training frame held by the tracker: backbone features with the
    Gaussian label and ltrb target of its box in patch coordinates.

    label_source is "annotation" for the initial frame and its augmented
    copies, "prediction" for frames labelled with the tracker's own output.
    """
    features: torch.Tensor
    label: torch.Tensor
    ltrb: torch.Tensor
    box: BoxXYWH
    confidence: float
    is_initial: bool
    frame_index: int
    label_source: str = "annotation"


class TrackerState:
    """
    Per-sequence tracking state. The initial samples are never evicted;
    recent samples fill the remaining capacity first-in first-out.
    """

    def __init__(self, box: BoxXYWH, capacity: int = 2, num_initial: int = 1):
        self.box = box
        self.capacity = capacity
        self.num_initial = num_initial
        self.memory: List[MemorySample] = []
        self.found = True
        self.frame_index = 0

    def initial_samples(self) -> List[MemorySample]:
        return [s for s in self.memory if s.is_initial]

    def recent_samples(self) -> List[MemorySample]:
        return [s for s in self.memory if not s.is_initial]

    def recent_capacity(self) -> int:
        return self.capacity - self.num_initial

    def add_sample(self, sample: MemorySample):
        if sample.is_initial:
            if len(self.initial_samples()) >= self.num_initial:
                raise ValueError("All initial memory slots are taken")
            position = len(self.initial_samples())
            self.memory.insert(position, sample)
            return
        self.memory.append(sample)
        recent = self.recent_samples()
        while len(recent) > self.recent_capacity():
            self.memory.remove(recent.pop(0))
