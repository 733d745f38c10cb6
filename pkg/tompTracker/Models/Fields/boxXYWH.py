import math
from dataclasses import dataclass
from typing import Sequence, Tuple


FRAME_TAGS = ("image", "patch")


@dataclass(frozen=True)
class BoxXYWH:
    """
    Axis-aligned box (x, y, w, h) in pixels of either the full image or the
    search patch, as named by frame_tag.
    """
    x: float
    y: float
    w: float
    h: float
    frame_tag: str = "image"

    def __post_init__(self):
        values = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"Box coordinates must be finite: {values}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"Degenerate box: w={self.w}, h={self.h}")
        if self.frame_tag not in FRAME_TAGS:
            raise ValueError(f"Unknown frame tag: {self.frame_tag}")

    @classmethod
    def from_sequence(cls, values: Sequence[float],
                      frame_tag: str = "image") -> "BoxXYWH":
        x, y, w, h = (float(v) for v in values)
        return cls(x, y, w, h, frame_tag)

    def center(self) -> Tuple[float, float]:
        return self.x + 0.5 * self.w, self.y + 0.5 * self.h

    def area(self) -> float:
        return self.w * self.h

    def base_size(self) -> float:
        return math.sqrt(self.w * self.h)

    def to_xyxy(self) -> Tuple[float, float, float, float]:
        return self.x, self.y, self.x + self.w, self.y + self.h

    def to_list(self):
        return [self.x, self.y, self.w, self.h]

    def flipped(self, width: float) -> "BoxXYWH":
        """
        Mirror the box horizontally inside a frame of the given width.
        """
        return BoxXYWH(width - self.x - self.w, self.y, self.w, self.h,
                       self.frame_tag)

    def flipped_vertical(self, height: float) -> "BoxXYWH":
        return BoxXYWH(self.x, height - self.y - self.h, self.w, self.h,
                       self.frame_tag)
