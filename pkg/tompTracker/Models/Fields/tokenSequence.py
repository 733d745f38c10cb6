from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import torch

from tompTracker.Models.Entities.target_encoding import positional_encoding


@dataclass
class TokenSequence:
    """
    Flattened training and test tokens of one predictor pass.

    tokens:   (B, L, C), L = (m + 1) * H * W, training frames first
    pos:      (L, C) positional encodings, repeated per frame
    frame_ids: (L,) source frame of each token, m for the test frame
    padding_mask: (B, L), True where the token is ignored
    """
    tokens: torch.Tensor
    pos: torch.Tensor
    frame_ids: torch.Tensor
    padding_mask: torch.Tensor
    grid: Tuple[int, int]

    def __post_init__(self):
        batch, length, _ = self.tokens.shape
        if self.padding_mask.shape != (batch, length):
            raise ValueError(
                f"Padding mask {tuple(self.padding_mask.shape)} does not "
                f"match {batch} sequences of {length} tokens")
        if self.pos.shape[0] != length or self.frame_ids.shape[0] != length:
            raise ValueError(
                "Positional encodings or frame ids length mismatch")

    @property
    def num_train_frames(self) -> int:
        return int(self.frame_ids.max())

    def test_tokens(self) -> torch.Tensor:
        """
        The test-frame tokens reshaped to a (B, C, H, W) map.
        """
        height, width = self.grid
        batch, _, channels = self.tokens.shape
        test = self.tokens[:, self.frame_ids == self.num_train_frames]
        if test.shape[1] != height * width:
            raise ValueError(
                f"Expected {height * width} test tokens, found "
                f"{test.shape[1]}")
        return test.transpose(1, 2).reshape(batch, channels, height, width)

    def with_tokens(self, tokens: torch.Tensor) -> "TokenSequence":
        return TokenSequence(tokens, self.pos, self.frame_ids,
                             self.padding_mask, self.grid)


@dataclass
class PredictedWeights:
    w_cls: torch.Tensor
    w_bbreg: torch.Tensor


MaskSpec = Optional[Union[Sequence[int], torch.Tensor]]


def build_sequence(v_train: Sequence[torch.Tensor], v_test: torch.Tensor,
                   mask_spec: MaskSpec = None) -> TokenSequence:
    """
    Flatten and concatenate training maps and the test map into one token
    sequence.

    mask_spec excludes whole training frames: either frame indices applied
    to every batch row, or a (B, m) boolean tensor, True meaning excluded.
    """
    if len(v_train) == 0:
        raise ValueError("At least one training frame is required")
    batch, channels, height, width = v_test.shape
    for index, v in enumerate(v_train):
        if v.shape != v_test.shape:
            raise ValueError(
                f"Training map {index} has shape {tuple(v.shape)}, "
                f"test map has {tuple(v_test.shape)}")
    num_train = len(v_train)
    cells = height * width

    maps = list(v_train) + [v_test]
    tokens = torch.cat([v.flatten(2).transpose(1, 2) for v in maps], dim=1)
    pos = positional_encoding(height, width, channels, dtype=v_test.dtype)
    pos = pos.to(v_test.device).flatten(1).transpose(0, 1)
    pos = pos.repeat(num_train + 1, 1)
    frame_ids = torch.arange(num_train + 1,
                             device=v_test.device).repeat_interleave(cells)

    excluded = torch.zeros(batch, num_train, dtype=torch.bool,
                           device=v_test.device)
    if isinstance(mask_spec, torch.Tensor):
        if mask_spec.shape != (batch, num_train):
            raise ValueError(
                f"Mask spec {tuple(mask_spec.shape)} does not match "
                f"{batch} rows of {num_train} training frames")
        excluded = mask_spec.to(dtype=torch.bool, device=v_test.device)
    elif mask_spec is not None:
        for index in mask_spec:
            if not 0 <= index < num_train:
                raise ValueError(f"No training frame {index} to mask")
            excluded[:, index] = True
    test_column = torch.zeros(batch, 1, dtype=torch.bool,
                              device=v_test.device)
    padding_mask = torch.cat([excluded, test_column], dim=1)
    padding_mask = padding_mask.repeat_interleave(cells, dim=1)
    return TokenSequence(tokens, pos, frame_ids, padding_mask,
                         (height, width))
