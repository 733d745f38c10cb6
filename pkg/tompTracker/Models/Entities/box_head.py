import torch
from torch import nn


class BoxHeadCNN(nn.Module):
    """
    Four convolution + instance-normalization + ReLU blocks and a final
    convolution to four channels with exponential activation, giving
    strictly positive dense ltrb maps.
    """

    def __init__(self, channels: int = 256, width: int = 256,
                 kernel: int = 3):
        super(BoxHeadCNN, self).__init__()
        padding = kernel // 2
        layers = []
        c_in = channels
        for _ in range(4):
            layers += [nn.Conv2d(c_in, width, kernel, padding=padding),
                       nn.InstanceNorm2d(width, eps=1e-5),
                       nn.ReLU(inplace=True)]
            c_in = width
        self.tower = nn.Sequential(*layers)
        self.output = nn.Conv2d(width, 4, kernel, padding=padding)
        nn.init.zeros_(self.output.bias)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return torch.exp(self.output(self.tower(features)))
