import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import torch

from tompTracker.config import ModelConfig, TrainConfig
from tompTracker.errors import CheckpointError
from tompTracker.Models.Entities.tomp_net import TompNet


logger = logging.getLogger(__name__)

FORMAT_NAME = "tomp-tracker-checkpoint"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """
    The checkpoint view of a training run: a versioned header with the flat
    config, the model parameters and, for resuming, the optimizer state,
    the step reached and the loss trace so far.
    """
    config: Dict[str, Any]
    parameters: Dict[str, torch.Tensor]
    optimizer: Optional[Dict[str, Any]] = None
    step: int = 0
    trace: List[List[float]] = field(default_factory=list)

    def model_config(self) -> ModelConfig:
        model_keys = set(ModelConfig().to_flat())
        return ModelConfig.from_flat({k: v for k, v in self.config.items()
                                      if k in model_keys})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "config": self.config,
            "parameters": self.parameters,
            "optimizer": self.optimizer,
            "step": self.step,
            "trace": self.trace,
        }

    def write(self, path) -> Path:
        """
        Write through a temporary file so an interrupted save never leaves
        a truncated checkpoint at path.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        partial = path.with_name(path.name + ".partial")
        torch.save(self.to_dict(), partial)
        os.replace(partial, path)
        logger.info("Checkpoint at step %d written to %s", self.step, path)
        return path

    @classmethod
    def read(cls, path) -> "Checkpoint":
        """
        Raises:
            FileNotFoundError: If the file does not exist
            CheckpointError: If the file is corrupt or of another format
                or version
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Checkpoint not found: {path}")
        try:
            payload = torch.load(path, map_location="cpu", weights_only=True)
        except Exception as e:
            raise CheckpointError(f"Corrupt checkpoint {path}: {e}") from e
        if not isinstance(payload, dict) \
                or payload.get("format") != FORMAT_NAME:
            raise CheckpointError(f"Not a tracker checkpoint: {path}")
        if payload.get("version") != FORMAT_VERSION:
            raise CheckpointError(
                f"Unsupported checkpoint version {payload.get('version')} "
                f"in {path}, expected {FORMAT_VERSION}")
        return cls(payload["config"], payload["parameters"],
                   payload.get("optimizer"), int(payload.get("step", 0)),
                   list(payload.get("trace", [])))


def save_checkpoint(path, net: TompNet, config: TrainConfig,
                    optimizer: Optional[torch.optim.Optimizer] = None,
                    step: int = 0, trace=()) -> Path:
    state = optimizer.state_dict() if optimizer is not None else None
    checkpoint = Checkpoint(config.to_flat(), net.state_dict(), state, step,
                            [list(row) for row in trace])
    return checkpoint.write(path)


def restore_parameters(net: TompNet, checkpoint: Checkpoint) -> TompNet:
    """
    Load parameters after checking that every name and shape agrees.
    """
    expected = {k: tuple(v.shape) for k, v in net.state_dict().items()}
    found = {k: tuple(v.shape) for k, v in checkpoint.parameters.items()}
    problems = []
    for name in sorted(set(expected) | set(found)):
        if name not in found:
            problems.append(f"{name}: missing")
        elif name not in expected:
            problems.append(f"{name}: unexpected")
        elif expected[name] != found[name]:
            problems.append(
                f"{name}: checkpoint {found[name]}, model {expected[name]}")
    if problems:
        raise CheckpointError("Checkpoint does not fit the model: "
                              + "; ".join(problems))
    net.load_state_dict(checkpoint.parameters)
    return net


def load_checkpoint(path, net: Optional[TompNet] = None
                    ) -> Tuple[TompNet, Checkpoint]:
    """
    Read a checkpoint and load it into net, or into a new network built
    from the checkpoint's own config.
    """
    checkpoint = Checkpoint.read(path)
    if net is None:
        try:
            net = TompNet(checkpoint.model_config())
        except (TypeError, ValueError) as e:
            raise CheckpointError(
                f"Checkpoint config cannot build a model: {e}") from e
    return restore_parameters(net, checkpoint), checkpoint
