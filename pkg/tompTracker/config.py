"""
Configuration records.

Config files are flat YAML mappings. Each key belongs to exactly one of the
records below; ``load_config`` routes every key to its owner and rejects
anything it does not recognise.
"""
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml


PREDICTORS = ("transformer", "dcf", "initial")


@dataclass
class TransformerConfig:
    heads: int = 8
    ffn_width: int = 2048
    dropout: float = 0.1
    enc_layers: int = 2
    dec_layers: int = 2
    shared_query: bool = True
    two_queries: bool = False

    def __post_init__(self):
        if self.heads < 1 or self.ffn_width < 1:
            raise ValueError("heads and ffn_width must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1): {self.dropout}")
        if self.enc_layers < 1 or self.dec_layers < 1:
            raise ValueError("at least one encoder and one decoder layer")


@dataclass
class ModelConfig:
    channels: int = 256
    backbone_channels: int = 64
    stride: int = 16
    score_size: int = 18
    extent_hidden: Tuple[int, int] = (64, 256)
    head_width: int = 256
    head_kernel: int = 3
    use_bg_embedding: bool = False
    use_test_embedding: bool = True
    use_extent_encoding: bool = True
    sigma_ratio: float = 0.25
    search_factor: float = 5.0
    transformer: TransformerConfig = field(default_factory=TransformerConfig)

    def __post_init__(self):
        self.extent_hidden = tuple(int(v) for v in self.extent_hidden)
        if self.stride != 16:
            raise ValueError("the backbone has a fixed total stride of 16")
        if self.channels % 4 != 0:
            raise ValueError(
                f"channels must be divisible by 4, got {self.channels}")
        if self.channels % self.transformer.heads != 0:
            raise ValueError(
                f"channels ({self.channels}) must be divisible by heads "
                f"({self.transformer.heads})")
        if len(self.extent_hidden) != 2:
            raise ValueError("extent_hidden holds exactly two widths")
        if self.head_kernel % 2 != 1:
            raise ValueError("head_kernel must be odd")
        if self.sigma_ratio <= 0:
            raise ValueError("sigma_ratio must be positive")
        if self.search_factor <= 1:
            raise ValueError("search_factor must exceed 1")

    @property
    def patch_size(self) -> int:
        return self.stride * self.score_size

    def to_flat(self) -> Dict[str, Any]:
        values = _own_values(self)
        values["extent_hidden"] = list(self.extent_hidden)
        values.update(_own_values(self.transformer))
        return values

    @classmethod
    def from_flat(cls, values: Dict[str, Any]) -> "ModelConfig":
        groups = _route(values, [TransformerConfig, ModelConfig])
        return cls(transformer=TransformerConfig(**groups[0]), **groups[1])


@dataclass
class LossWeights:
    lambda_cls: float = 100.0
    lambda_giou: float = 1.0
    tau: float = 0.05

    def __post_init__(self):
        if min(self.lambda_cls, self.lambda_giou, self.tau) < 0:
            raise ValueError("loss weights and tau must be nonnegative")


@dataclass
class AugmentConfig:
    augment: bool = True
    center_jitter_train: float = 1.0
    center_jitter_test: float = 2.0
    scale_jitter_train: float = 0.1
    scale_jitter_test: float = 0.2
    flip_prob: float = 0.5
    color_jitter: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must lie in [0, 1]")
        if not 0.0 <= self.color_jitter < 1.0:
            raise ValueError("color_jitter must lie in [0, 1)")


@dataclass
class TrackerConfig:
    eta: float = 0.9
    not_found_threshold: float = 0.25
    memory_capacity: int = 2
    num_initial: int = 1
    predictor: str = "transformer"
    two_stage: bool = True
    dcf_iters: int = 5
    dcf_reg: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.not_found_threshold < self.eta <= 1:
            raise ValueError(
                "expected 0 < not_found_threshold < eta <= 1, got "
                f"{self.not_found_threshold} and {self.eta}")
        if self.predictor not in PREDICTORS:
            raise ValueError(f"unknown predictor: {self.predictor}")
        if self.num_initial < 1:
            raise ValueError("at least one initial sample is kept")
        if self.memory_capacity <= self.num_initial:
            raise ValueError(
                "memory_capacity must leave room for a recent sample")
        if self.dcf_iters < 0 or self.dcf_reg < 0:
            raise ValueError("dcf_iters and dcf_reg must be nonnegative")


@dataclass
class TrainConfig:
    seed: int = 0
    steps: int = 2000
    batch_size: int = 4
    lr: float = 1e-4
    weight_decay: float = 1e-4
    lr_decay: float = 0.2
    decay_at: List[float] = field(default_factory=lambda: [0.6])
    window: int = 200
    num_sequences: int = 16
    sequence_length: int = 300
    canvas_width: int = 320
    canvas_height: int = 240
    distractors: int = 2
    num_workers: int = 0
    checkpoint_every: int = 500
    log_every: int = 50
    giou_center_only: bool = False
    output_dir: str = "runs/reference"
    resume: Optional[str] = None
    model: ModelConfig = field(default_factory=ModelConfig)
    loss: LossWeights = field(default_factory=LossWeights)
    augmentation: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        self.decay_at = [float(v) for v in self.decay_at]
        if self.steps < 0 or self.batch_size < 1:
            raise ValueError("steps must be >= 0 and batch_size >= 1")
        if self.lr < 0 or self.weight_decay < 0:
            raise ValueError("lr and weight_decay must be nonnegative")
        if any(not 0.0 < v < 1.0 for v in self.decay_at):
            raise ValueError("decay_at fractions must lie in (0, 1)")
        if self.window < 3:
            raise ValueError("window must hold at least three frames")

    def milestones(self) -> List[int]:
        return sorted({max(1, int(round(v * self.steps)))
                       for v in self.decay_at})

    def to_flat(self) -> Dict[str, Any]:
        values = _own_values(self)
        values.update(self.model.to_flat())
        values.update(_own_values(self.loss))
        values.update(_own_values(self.augmentation))
        return values

    @classmethod
    def from_flat(cls, values: Dict[str, Any]) -> "TrainConfig":
        groups = _route(values, [TransformerConfig, ModelConfig, LossWeights,
                                 AugmentConfig, TrainConfig])
        model = ModelConfig(transformer=TransformerConfig(**groups[0]),
                            **groups[1])
        return cls(model=model, loss=LossWeights(**groups[2]),
                   augmentation=AugmentConfig(**groups[3]), **groups[4])


def _own_values(record) -> Dict[str, Any]:
    """
    The scalar fields of a record, without nested records.
    """
    return {f.name: getattr(record, f.name)
            for f in dataclasses.fields(record)
            if not dataclasses.is_dataclass(getattr(record, f.name))}


def _route(values: Dict[str, Any], owners) -> List[Dict[str, Any]]:
    groups = [{} for _ in owners]
    unknown = []
    for key, value in values.items():
        for group, owner in zip(groups, owners):
            names = {f.name for f in dataclasses.fields(owner)
                     if not _is_nested(f)}
            if key in names:
                group[key] = value
                break
        else:
            unknown.append(key)
    if unknown:
        raise ValueError("Unknown config keys: " + ", ".join(sorted(unknown)))
    return groups


def _is_nested(f: dataclasses.Field) -> bool:
    return f.name in ("model", "loss", "augmentation", "transformer")


def load_config(path) -> TrainConfig:
    """
    Read a flat YAML config file into a TrainConfig.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file is not a flat mapping or holds unknown keys
    """
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(config_path, "r") as f:
        values = yaml.safe_load(f) or {}
    if not isinstance(values, dict):
        raise ValueError(f"Config file is not a key-value mapping: {path}")
    nested = [key for key, value in values.items() if isinstance(value, dict)]
    if nested:
        raise ValueError("Config keys must be flat: " + ", ".join(nested))
    return TrainConfig.from_flat(values)


def save_config(config: TrainConfig, path) -> None:
    with open(path, "w") as f:
        yaml.safe_dump(config.to_flat(), f, sort_keys=True)
