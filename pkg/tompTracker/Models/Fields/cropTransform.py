from dataclasses import dataclass
from typing import Tuple

import cv2
import numpy as np

from tompTracker.Models.Fields.boxXYWH import BoxXYWH


@dataclass(frozen=True)
class CropTransform:
    """
    Affine map from search-patch pixels to image pixels:
    image = offset + scale * patch.
    """
    scale: float
    offset_x: float
    offset_y: float
    out_px: int

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"Crop scale must be positive: {self.scale}")
        if self.out_px < 1:
            raise ValueError(f"Crop size must be positive: {self.out_px}")

    def to_image(self, u: float, v: float) -> Tuple[float, float]:
        return (self.offset_x + self.scale * u,
                self.offset_y + self.scale * v)

    def to_patch(self, x: float, y: float) -> Tuple[float, float]:
        return ((x - self.offset_x) / self.scale,
                (y - self.offset_y) / self.scale)

    def box_to_patch(self, box: BoxXYWH) -> BoxXYWH:
        if box.frame_tag != "image":
            raise ValueError("Expected an image-frame box")
        x, y = self.to_patch(box.x, box.y)
        return BoxXYWH(x, y, box.w / self.scale, box.h / self.scale, "patch")

    def box_to_image(self, box: BoxXYWH) -> BoxXYWH:
        if box.frame_tag != "patch":
            raise ValueError("Expected a patch-frame box")
        x, y = self.to_image(box.x, box.y)
        return BoxXYWH(x, y, box.w * self.scale, box.h * self.scale, "image")

    def matrix(self) -> np.ndarray:
        """
        The 2x3 patch-to-image matrix.
        """
        return np.array([[self.scale, 0.0, self.offset_x],
                         [0.0, self.scale, self.offset_y]], dtype=np.float64)

    def padding_mask(self, image_shape) -> np.ndarray:
        """
        Patch pixels whose source location falls outside the image.
        """
        height, width = image_shape[:2]
        grid = np.arange(self.out_px, dtype=np.float64)
        xs = self.offset_x + self.scale * grid
        ys = self.offset_y + self.scale * grid
        outside_x = (xs < 0) | (xs > width - 1)
        outside_y = (ys < 0) | (ys > height - 1)
        return outside_y[:, None] | outside_x[None, :]

    def extract(self, image: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Sample the out_px x out_px patch. Area outside the image repeats the
        nearest edge pixel.

        Returns:
            (patch, padding mask)
        """
        size = (self.out_px, self.out_px)
        patch = cv2.warpAffine(image, self.matrix(), size,
                               flags=cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP,
                               borderMode=cv2.BORDER_REPLICATE)
        return patch, self.padding_mask(image.shape)
