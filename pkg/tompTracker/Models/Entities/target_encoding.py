"""
Target-state encodings that turn backbone features into predictor tokens.

Feature maps are (B, C, H, W), Gaussian labels (B, H, W) and ltrb maps
(B, 4, H, W).
"""
import math
from typing import Optional, Sequence

import torch
from torch import nn


class ExtentMLP(nn.Module):
    """
    Per-cell encoding of the 4-vector ltrb target extent:
    4 -> hidden[0] -> hidden[1] -> C, each hidden layer linear + batch norm
    + ReLU, the last one linear only.
    """

    def __init__(self, channels: int = 256,
                 hidden: Sequence[int] = (64, 256)):
        super(ExtentMLP, self).__init__()
        first, second = hidden
        self.layers = nn.Sequential(
            nn.Linear(4, first), nn.BatchNorm1d(first), nn.ReLU(),
            nn.Linear(first, second), nn.BatchNorm1d(second), nn.ReLU(),
            nn.Linear(second, channels))

    def forward(self, ltrb: torch.Tensor) -> torch.Tensor:
        batch, _, height, width = ltrb.shape
        cells = ltrb.permute(0, 2, 3, 1).reshape(-1, 4)
        encoded = self.layers(cells)
        return encoded.reshape(batch, height, width, -1).permute(0, 3, 1, 2)


def encode_location(label: torch.Tensor, e_fg: torch.Tensor,
                    e_bg: Optional[torch.Tensor] = None) -> torch.Tensor:
    """
    y * e_fg, plus (1 - y) * e_bg when a background embedding is used.
    """
    y = label.unsqueeze(1)
    encoded = y * e_fg.view(1, -1, 1, 1)
    if e_bg is not None:
        encoded = encoded + (1.0 - y) * e_bg.view(1, -1, 1, 1)
    return encoded


def assemble_train_tokens(x: torch.Tensor, label: torch.Tensor,
                          ltrb: torch.Tensor,
                          extent_mlp: Optional[nn.Module],
                          e_fg: torch.Tensor,
                          e_bg: Optional[torch.Tensor] = None) -> torch.Tensor:
    """
    v = x + psi(y, e_fg[, e_bg]) + phi(d); phi is skipped when extent_mlp is
    None.
    """
    batch, _, height, width = x.shape
    if label.shape != (batch, height, width):
        raise ValueError(
            f"Label shape {tuple(label.shape)} does not match features "
            f"{tuple(x.shape)}")
    if ltrb.shape != (batch, 4, height, width):
        raise ValueError(
            f"ltrb shape {tuple(ltrb.shape)} does not match features "
            f"{tuple(x.shape)}")
    tokens = x + encode_location(label, e_fg, e_bg)
    if extent_mlp is not None:
        tokens = tokens + extent_mlp(ltrb)
    return tokens


def assemble_test_tokens(x: torch.Tensor,
                         e_test: Optional[torch.Tensor]) -> torch.Tensor:
    if e_test is None:
        return x
    if e_test.shape[-1] != x.shape[1]:
        raise ValueError("e_test length does not match the feature channels")
    return x + e_test.view(1, -1, 1, 1)


def positional_encoding(height: int, width: int, channels: int,
                        temperature: float = 10000.0,
                        dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """
    Fixed 2-D sine encoding, shape (C, H, W): the first C/2 channels encode
    the row, the rest the column.
    """
    if channels % 4 != 0:
        raise ValueError(f"channels must be divisible by 4: {channels}")
    num_feats = channels // 2
    scale = 2 * math.pi
    y_embed = torch.arange(1, height + 1, dtype=dtype) / height * scale
    x_embed = torch.arange(1, width + 1, dtype=dtype) / width * scale
    y_embed = y_embed[:, None].expand(height, width)
    x_embed = x_embed[None, :].expand(height, width)

    dim_t = torch.arange(num_feats, dtype=dtype)
    dim_t = temperature ** (2 * torch.div(dim_t, 2, rounding_mode="floor")
                            / num_feats)
    pos_x = x_embed[..., None] / dim_t
    pos_y = y_embed[..., None] / dim_t
    pos_x = torch.stack((pos_x[..., 0::2].sin(), pos_x[..., 1::2].cos()),
                        dim=3).flatten(2)
    pos_y = torch.stack((pos_y[..., 0::2].sin(), pos_y[..., 1::2].cos()),
                        dim=3).flatten(2)
    return torch.cat((pos_y, pos_x), dim=2).permute(2, 0, 1)


class TargetEncoding(nn.Module):
    """
    Learnable foreground/background/test embeddings and the extent MLP.
    """

    def __init__(self, channels: int = 256,
                 extent_hidden: Sequence[int] = (64, 256),
                 use_bg_embedding: bool = False,
                 use_test_embedding: bool = True,
                 use_extent_encoding: bool = True):
        super(TargetEncoding, self).__init__()
        self.e_fg = nn.Parameter(torch.randn(channels))
        self.e_bg = nn.Parameter(torch.randn(channels)) \
            if use_bg_embedding else None
        self.e_test = nn.Parameter(torch.randn(channels)) \
            if use_test_embedding else None
        self.extent_mlp = ExtentMLP(channels, extent_hidden) \
            if use_extent_encoding else None

    def train_tokens(self, x: torch.Tensor, label: torch.Tensor,
                     ltrb: torch.Tensor) -> torch.Tensor:
        return assemble_train_tokens(x, label, ltrb, self.extent_mlp,
                                     self.e_fg, self.e_bg)

    def test_tokens(self, x: torch.Tensor) -> torch.Tensor:
        return assemble_test_tokens(x, self.e_test)
