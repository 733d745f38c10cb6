import numpy as np
import torch
from torch import nn


class TinyBackbone(nn.Module):
    """
    Four stride-2 convolution blocks (total stride 16) followed by a 1x1
    convolution that reduces backbone_channels to the model width.
    """
    stride = 16

    def __init__(self, channels: int = 256, backbone_channels: int = 64):
        super(TinyBackbone, self).__init__()
        widths = [3, max(1, backbone_channels // 4),
                  max(1, backbone_channels // 2),
                  backbone_channels, backbone_channels]
        layers = []
        for c_in, c_out in zip(widths[:-1], widths[1:]):
            layers.append(nn.Conv2d(c_in, c_out, 3, stride=2, padding=1))
            layers.append(nn.ReLU(inplace=True))
        self.blocks = nn.Sequential(*layers)
        self.reduce = nn.Conv2d(backbone_channels, channels, 1)

    def forward(self, patch: torch.Tensor) -> torch.Tensor:
        if patch.dim() != 4 or patch.shape[1] != 3:
            raise ValueError(
                "Expected a (B, 3, H, W) patch batch, got "
                f"{tuple(patch.shape)}")
        height, width = patch.shape[-2:]
        if height % self.stride or width % self.stride:
            raise ValueError(
                f"Patch size {height}x{width} is not divisible by "
                f"{self.stride}")
        return self.reduce(self.blocks(patch))


def patch_to_tensor(patches: np.ndarray) -> torch.Tensor:
    """
    uint8 (..., H, W, 3) patches to float (..., 3, H, W) in [-0.5, 0.5].
    """
    tensor = torch.from_numpy(np.ascontiguousarray(patches)).float()
    tensor = tensor / 255.0 - 0.5
    return tensor.movedim(-1, -3)
