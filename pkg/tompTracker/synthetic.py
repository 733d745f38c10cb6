"""
Synthetic tracking sequences: a textured ellipse or rectangle moving over a
multi-octave noise background, with look-alike distractors and declared
occlusion windows.

Everything is derived from the sequence seed. Frames are rendered on demand,
so a sequence of any length costs one background image of memory.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple

import cv2
import numpy as np
from tqdm import tqdm


logger = logging.getLogger(__name__)

SHAPES = ("ellipse", "rectangle")


@dataclass
class SyntheticSequenceSpec:
    seed: int = 0
    length: int = 100
    canvas_width: int = 320
    canvas_height: int = 240
    min_size: int = 24
    max_size: int = 56
    shape: str = "random"
    max_speed: float = 4.0
    distractors: int = 0
    occlusions: Sequence[Tuple[int, int]] = field(default_factory=tuple)
    margin: int = 8

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"Sequence length must be >= 1: {self.length}")
        if not 0 < self.min_size <= self.max_size:
            raise ValueError("Expected 0 < min_size <= max_size")
        if self.shape not in SHAPES + ("random",):
            raise ValueError(f"Unknown target shape: {self.shape}")
        if self.distractors < 0:
            raise ValueError("distractors must be >= 0")
        room = min(self.canvas_width, self.canvas_height) - 2 * self.margin
        if self.max_size > room:
            raise ValueError(
                f"Infeasible trajectory: a {self.max_size}px target does not "
                f"fit a {self.canvas_width}x{self.canvas_height} canvas with "
                f"a {self.margin}px margin")
        for start, end in self.occlusions:
            if not 0 <= start < end:
                raise ValueError(f"Bad occlusion window: ({start}, {end})")


@dataclass
class Look:
    shape: str
    color: np.ndarray
    stripe_color: np.ndarray
    period: float
    angle: float


def _trajectory(rng: np.random.Generator,
                spec: SyntheticSequenceSpec) -> np.ndarray:
    """
    Integer (x, y, w, h) per frame; sizes stay in [min_size, max_size] and
    the box stays margin pixels inside the canvas.
    """
    n = spec.length
    base = rng.uniform(spec.min_size, spec.max_size, size=2)
    amplitude = rng.uniform(0.0, 0.15, size=2)
    period = rng.uniform(40, 120, size=2)
    phase = rng.uniform(0, 2 * math.pi, size=2)
    t = np.arange(n)[:, None]
    sizes = base * (1 + amplitude * np.sin(2 * math.pi * t / period + phase))
    sizes = np.clip(np.round(sizes), spec.min_size, spec.max_size)

    canvas = np.array([spec.canvas_width, spec.canvas_height], dtype=float)
    low = spec.margin + sizes[0] / 2
    high = canvas - spec.margin - sizes[0] / 2
    center = rng.uniform(low, high)
    velocity = rng.uniform(-spec.max_speed, spec.max_speed, size=2)

    boxes = np.zeros((n, 4), dtype=np.int64)
    for i in range(n):
        low = spec.margin + sizes[i] / 2
        high = canvas - spec.margin - sizes[i] / 2
        if i > 0:
            velocity = velocity + rng.normal(0.0, 0.5, size=2)
            speed = np.linalg.norm(velocity)
            if speed > spec.max_speed:
                velocity = velocity * spec.max_speed / speed
            center = center + velocity
        for axis in range(2):
            if center[axis] < low[axis]:
                center[axis] = 2 * low[axis] - center[axis]
                velocity[axis] = abs(velocity[axis])
            elif center[axis] > high[axis]:
                center[axis] = 2 * high[axis] - center[axis]
                velocity[axis] = -abs(velocity[axis])
        center = np.clip(center, low, high)
        top_left = np.round(center - sizes[i] / 2)
        top_left = np.clip(top_left, spec.margin,
                           canvas - spec.margin - sizes[i])
        boxes[i] = [top_left[0], top_left[1], sizes[i][0], sizes[i][1]]
    return boxes


def _look(rng: np.random.Generator, shape: str) -> Look:
    if shape == "random":
        shape = SHAPES[int(rng.integers(len(SHAPES)))]
    color = rng.uniform(40, 215, size=3)
    stripe_color = np.clip(color + rng.uniform(-60, 60, size=3), 0, 255)
    return Look(shape, color, stripe_color, float(rng.uniform(4, 12)),
                float(rng.uniform(0, math.pi)))


def _similar_look(rng: np.random.Generator, look: Look) -> Look:
    color = np.clip(look.color + rng.normal(0, 20, size=3), 0, 255)
    stripe = np.clip(look.stripe_color + rng.normal(0, 20, size=3), 0, 255)
    return Look(look.shape, color, stripe, look.period * rng.uniform(0.8, 1.2),
                look.angle + rng.normal(0, 0.3))


def _noise_background(rng: np.random.Generator, width: int,
                      height: int) -> np.ndarray:
    canvas = np.zeros((height, width, 3), dtype=np.float32)
    for octave, cells in enumerate((4, 8, 16, 32)):
        grid = rng.random((cells, cells, 3)).astype(np.float32)
        layer = cv2.resize(grid, (width, height),
                           interpolation=cv2.INTER_CUBIC)
        canvas += layer / (2 ** octave)
    canvas -= canvas.min()
    canvas /= max(float(canvas.max()), 1e-6)
    return (25 + 200 * canvas).astype(np.float32)


def _sprite(look: Look, w: int, h: int) -> Tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    phase = xx * math.cos(look.angle) + yy * math.sin(look.angle)
    stripes = 0.5 + 0.5 * np.sin(2 * math.pi * phase / look.period)
    pixels = (look.color[None, None, :] * (1 - stripes[..., None])
              + look.stripe_color[None, None, :] * stripes[..., None])
    mask = np.zeros((h, w), dtype=np.uint8)
    if look.shape == "ellipse":
        cv2.ellipse(mask, (w // 2, h // 2),
                    (max(1, w // 2 - 1), max(1, h // 2 - 1)),
                    0, 0, 360, 1, -1)
    else:
        cv2.rectangle(mask, (0, 0), (w - 1, h - 1), 1, -1)
    return pixels.astype(np.float32), mask.astype(bool)


def _paste(canvas: np.ndarray, look: Look, box) -> None:
    x, y, w, h = (int(v) for v in box)
    height, width = canvas.shape[:2]
    pixels, mask = _sprite(look, w, h)
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, width), min(y + h, height)
    if x1 <= x0 or y1 <= y0:
        return
    region = canvas[y0:y1, x0:x1]
    sub_mask = mask[y0 - y:y1 - y, x0 - x:x1 - x]
    region[sub_mask] = pixels[y0 - y:y1 - y, x0 - x:x1 - x][sub_mask]


class SyntheticSequence:
    """
    A rendered-on-demand synthetic sequence with ground truth per frame.
    """

    def __init__(self, spec: SyntheticSequenceSpec, name: str = ""):
        self.spec = spec
        self.name = name or f"synth_{spec.seed}"
        rng = np.random.default_rng(spec.seed)
        self.background = _noise_background(rng, spec.canvas_width,
                                            spec.canvas_height)
        self.look = _look(rng, spec.shape)
        self.boxes = _trajectory(rng, spec)
        self.distractor_looks = []
        self.distractor_boxes = []
        for _ in range(spec.distractors):
            self.distractor_looks.append(_similar_look(rng, self.look))
            self.distractor_boxes.append(_trajectory(rng, spec))
        self.occluder_color = self.background.mean(axis=(0, 1))
        self.visible = np.ones(spec.length, dtype=bool)
        for start, end in spec.occlusions:
            self.visible[start:min(end, spec.length)] = False

    def __len__(self) -> int:
        return self.spec.length

    def frame(self, index: int) -> np.ndarray:
        if not 0 <= index < len(self):
            raise IndexError(f"Frame {index} outside a {len(self)}-frame "
                             "sequence")
        rng = np.random.default_rng([self.spec.seed, index])
        canvas = self.background.copy()
        for look, boxes in zip(self.distractor_looks, self.distractor_boxes):
            _paste(canvas, look, boxes[index])
        _paste(canvas, self.look, self.boxes[index])
        if not self.visible[index]:
            x, y, w, h = (int(v) for v in self.boxes[index])
            canvas[max(0, y - 4):y + h + 4, max(0, x - 4):x + w + 4] = \
                self.occluder_color
        canvas += rng.normal(0.0, 3.0, size=canvas.shape).astype(np.float32)
        return np.clip(np.round(canvas), 0, 255).astype(np.uint8)

    def frames(self) -> Iterator[np.ndarray]:
        for index in range(len(self)):
            yield self.frame(index)


def generate_sequence(spec: SyntheticSequenceSpec,
                      name: str = "") -> SyntheticSequence:
    return SyntheticSequence(spec, name)


def write_sequence(sequence: SyntheticSequence, directory) -> Path:
    """
    Write numbered PNG frames and a groundtruth.txt of x,y,w,h lines.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, frame in enumerate(sequence.frames()):
        cv2.imwrite(str(directory / f"{index + 1:08d}.png"), frame)
    lines = [",".join(str(int(v)) for v in box) for box in sequence.boxes]
    (directory / "groundtruth.txt").write_text("\n".join(lines) + "\n")
    return directory


def dataset_specs(num_sequences: int, length: int, seed: int,
                  distractors: int = 2, canvas_width: int = 320,
                  canvas_height: int = 240) -> List[SyntheticSequenceSpec]:
    """
    Specs for a dataset; sequence i is seeded from (seed, i) and gets one
    occlusion window when it is long enough.
    """
    specs = []
    for index in range(num_sequences):
        sequence_seed = int(np.random.SeedSequence([seed, index])
                            .generate_state(1)[0])
        rng = np.random.default_rng(sequence_seed)
        occlusions = ()
        if length >= 60:
            start = int(rng.integers(length // 3, length - 20))
            occlusions = ((start, start + int(rng.integers(3, 10))),)
        specs.append(SyntheticSequenceSpec(
            seed=sequence_seed, length=length, canvas_width=canvas_width,
            canvas_height=canvas_height, distractors=distractors,
            occlusions=occlusions))
    return specs


def write_dataset(root, specs: Sequence[SyntheticSequenceSpec]) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for index, spec in enumerate(tqdm(specs, desc="synth", unit="seq")):
        name = f"seq_{index:03d}"
        write_sequence(generate_sequence(spec, name), root / name)
    logger.info("Wrote %d synthetic sequences to %s", len(specs), root)
    return root
