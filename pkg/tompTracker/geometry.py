"""
Coordinate transforms, label generation, ltrb encoding and box overlap.

Dense maps are channel-first torch tensors: a Gaussian label is (H, W), a
dense ltrb map is (4, H, W) with channels (l, t, r, b). Distances use the
nonnegative FCOS convention: r is measured from the cell to the right side
and b from the cell to the bottom side, so every entry is >= 0 at cells
inside the box.
"""
import math
from typing import Sequence, Tuple

import torch

from tompTracker.errors import InvalidPredictionError
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Models.Fields.cropTransform import CropTransform


def remap_grid(height: int, width: int, stride: int,
               dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """
    Image coordinates of every feature cell, shape (H, W, 2) holding
    (k_x, k_y) = (s // 2 + s * j_x, s // 2 + s * j_y).
    """
    if height < 1 or width < 1:
        raise ValueError(f"Grid must be at least 1x1: {height}x{width}")
    if stride < 1:
        raise ValueError(f"Stride must be >= 1: {stride}")
    half = stride // 2
    kx = half + stride * torch.arange(width, dtype=dtype)
    ky = half + stride * torch.arange(height, dtype=dtype)
    grid_y, grid_x = torch.meshgrid(ky, kx, indexing="ij")
    return torch.stack([grid_x, grid_y], dim=-1)


def gaussian_label(box: BoxXYWH, height: int, width: int, stride: int,
                   sigma_ratio: float = 0.25,
                   dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """
    Gaussian centred on the box centre, sigma = sigma_ratio * sqrt(w * h).
    """
    if box.w <= 0 or box.h <= 0:
        raise ValueError(f"Degenerate box: {box}")
    if sigma_ratio <= 0:
        raise ValueError(f"sigma_ratio must be positive: {sigma_ratio}")
    grid = remap_grid(height, width, stride, dtype)
    cx, cy = box.center()
    sigma = sigma_ratio * box.base_size()
    dist2 = (grid[..., 0] - cx) ** 2 + (grid[..., 1] - cy) ** 2
    return torch.exp(-dist2 / (2.0 * sigma ** 2))


def ltrb_at(box: BoxXYWH, kx, ky, patch_w: float, patch_h: float) -> Tuple:
    """
    Distances from the point (kx, ky) to the box edges over the patch size.
    kx and ky may be scalars or tensors of cell coordinates.
    """
    x1, y1, x2, y2 = box.to_xyxy()
    return ((kx - x1) / patch_w, (ky - y1) / patch_h,
            (x2 - kx) / patch_w, (y2 - ky) / patch_h)


def encode_ltrb(box: BoxXYWH, height: int, width: int, stride: int,
                dtype: torch.dtype = torch.float32) -> torch.Tensor:
    grid = remap_grid(height, width, stride, dtype)
    ltrb = ltrb_at(box, grid[..., 0], grid[..., 1], float(stride * width),
                   float(stride * height))
    return torch.stack(ltrb, dim=0)


def decode_ltrb(ltrb, cell: Tuple[int, int], stride: int,
                height: int, width: int) -> BoxXYWH:
    """
    Read the box encoded at cell (row, col) of a dense (4, H, W) ltrb map.

    Raises:
        InvalidPredictionError: If the implied width or height is not positive
    """
    row, col = cell
    if not (0 <= row < height and 0 <= col < width):
        raise ValueError(f"Cell {cell} outside a {height}x{width} grid")
    l, t, r, b = (float(ltrb[c][row][col]) for c in range(4))
    patch_w = float(stride * width)
    patch_h = float(stride * height)
    kx = stride // 2 + stride * col
    ky = stride // 2 + stride * row
    w = (l + r) * patch_w
    h = (t + b) * patch_h
    if not (math.isfinite(w) and math.isfinite(h) and w > 0 and h > 0):
        raise InvalidPredictionError(
            f"Decoded box has width {w} and height {h} at cell {cell}")
    return BoxXYWH(kx - l * patch_w, ky - t * patch_h, w, h, "patch")


def _overlap(a: BoxXYWH, b: BoxXYWH):
    if a.frame_tag != b.frame_tag:
        raise ValueError(
            f"Boxes live in different frames: {a.frame_tag}, {b.frame_tag}")
    ax1, ay1, ax2, ay2 = a.to_xyxy()
    bx1, by1, bx2, by2 = b.to_xyxy()
    inter_w = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    inter_h = max(0.0, min(ay2, by2) - max(ay1, by1))
    inter = inter_w * inter_h
    union = a.area() + b.area() - inter
    hull = (max(ax2, bx2) - min(ax1, bx1)) * (max(ay2, by2) - min(ay1, by1))
    return inter, union, hull


def iou(a: BoxXYWH, b: BoxXYWH) -> float:
    inter, union, _ = _overlap(a, b)
    return inter / union


def giou(a: BoxXYWH, b: BoxXYWH) -> float:
    inter, union, hull = _overlap(a, b)
    return inter / union - (hull - union) / hull


def make_crop(target: BoxXYWH, factor: float = 5.0,
              out_px: int = 288) -> CropTransform:
    """
    Square search region of side factor * sqrt(w * h) centred on the target,
    resampled to out_px x out_px.
    """
    if target.frame_tag != "image":
        raise ValueError("Crops are cut around image-frame boxes")
    if target.w <= 0 or target.h <= 0:
        raise ValueError(f"Degenerate target box: {target}")
    if factor <= 1:
        raise ValueError(f"Search factor must exceed 1: {factor}")
    side = factor * target.base_size()
    cx, cy = target.center()
    return CropTransform(scale=side / out_px, offset_x=cx - 0.5 * side,
                         offset_y=cy - 0.5 * side, out_px=out_px)


def make_labels(boxes: Sequence[BoxXYWH], size: int, stride: int,
                sigma_ratio: float, dtype: torch.dtype = torch.float32):
    """
    Stack Gaussian labels (N, H, W) and ltrb targets (N, 4, H, W) for
    patch-frame boxes.
    """
    labels = [gaussian_label(box, size, size, stride, sigma_ratio, dtype)
              for box in boxes]
    targets = [encode_ltrb(box, size, size, stride, dtype) for box in boxes]
    return torch.stack(labels), torch.stack(targets)


def cell_boxes(ltrb: torch.Tensor) -> torch.Tensor:
    """
    Boxes relative to their own cell, (x1, y1, x2, y2) = (-l, -t, r, b) in
    normalized patch units. ltrb has its four channels on the last axis.
    """
    return torch.stack([-ltrb[..., 0], -ltrb[..., 1],
                        ltrb[..., 2], ltrb[..., 3]], dim=-1)


def paired_giou(boxes1: torch.Tensor, boxes2: torch.Tensor) -> torch.Tensor:
    """
    Elementwise GIoU of two (N, 4) xyxy tensors.
    """
    area1 = (boxes1[:, 2] - boxes1[:, 0]) * (boxes1[:, 3] - boxes1[:, 1])
    area2 = (boxes2[:, 2] - boxes2[:, 0]) * (boxes2[:, 3] - boxes2[:, 1])

    lt = torch.max(boxes1[:, :2], boxes2[:, :2])
    rb = torch.min(boxes1[:, 2:], boxes2[:, 2:])
    wh = (rb - lt).clamp(min=0)
    inter = wh[:, 0] * wh[:, 1]
    union = area1 + area2 - inter

    lt = torch.min(boxes1[:, :2], boxes2[:, :2])
    rb = torch.max(boxes1[:, 2:], boxes2[:, 2:])
    wh = (rb - lt).clamp(min=0)
    hull = wh[:, 0] * wh[:, 1]
    return inter / union - (hull - union) / hull
