import math

import numpy as np
import pytest
import torch
from tompTracker.errors import InvalidPredictionError
from tompTracker.geometry import (
    cell_boxes,
    decode_ltrb,
    encode_ltrb,
    gaussian_label,
    giou,
    iou,
    ltrb_at,
    make_crop,
    make_labels,
    paired_giou,
    remap_grid
)
from tompTracker.Models.Fields.boxXYWH import BoxXYWH


def test_remap_grid():
    grid = remap_grid(18, 18, 16)
    assert grid.shape == (18, 18, 2)
    assert grid[0, 0].tolist() == [8, 8]
    assert grid[2, 5].tolist() == [8 + 16 * 5, 8 + 16 * 2]


def test_gaussian_label_peaks_at_centre():
    box = BoxXYWH(8 + 16 * 4 - 10, 8 + 16 * 7 - 6, 20, 12, "patch")
    label = gaussian_label(box, 18, 18, 16)
    assert label.shape == (18, 18)
    assert label[7, 4] == pytest.approx(1.0)
    assert int(label.argmax()) == 7 * 18 + 4
    assert float(label.min()) >= 0


def test_gaussian_label_sigma():
    box = BoxXYWH(0, 0, 16, 16, "patch")
    label = gaussian_label(box, 2, 2, 16, 0.25, torch.float64)
    sigma = 0.25 * 16
    expected = math.exp(-(16 ** 2 + 16 ** 2) / (2 * sigma ** 2))
    assert float(label[1, 1]) == pytest.approx(expected)


def test_encode_ltrb_at_a_cell():
    box = BoxXYWH(40, 24, 50, 60, "patch")
    ltrb = encode_ltrb(box, 18, 18, 16, torch.float64)
    kx, ky = 8 + 16 * 3, 8 + 16 * 2
    expected = [(kx - 40) / 288, (ky - 24) / 288,
                (90 - kx) / 288, (84 - ky) / 288]
    assert ltrb[:, 2, 3].tolist() == pytest.approx(expected)
    assert ltrb_at(box, kx, ky, 288, 288) == pytest.approx(expected)


def test_ltrb_round_trip_random_pairs():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        x, y = rng.uniform(-50, 250, size=2)
        w, h = rng.uniform(1, 200, size=2)
        box = BoxXYWH(x, y, w, h, "patch")
        row, col = (int(v) for v in rng.integers(0, 18, size=2))
        ltrb = encode_ltrb(box, 18, 18, 16, torch.float64)
        decoded = decode_ltrb(ltrb, (row, col), 16, 18, 18)
        assert decoded.to_list() == pytest.approx(box.to_list(), abs=1e-9)
        assert decoded.frame_tag == "patch"


def test_decode_rejects_empty_box():
    ltrb = torch.zeros(4, 3, 3)
    ltrb[0] = -0.1
    with pytest.raises(InvalidPredictionError):
        decode_ltrb(ltrb, (1, 1), 16, 3, 3)
    with pytest.raises(ValueError):
        decode_ltrb(torch.ones(4, 3, 3), (3, 0), 16, 3, 3)


def test_iou_and_giou():
    a = BoxXYWH(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert giou(a, a) == 1.0
    assert iou(a, BoxXYWH(0, 0, 10, 5)) == pytest.approx(0.5)
    far = BoxXYWH(20, 0, 10, 10)
    assert iou(a, far) == 0.0
    assert giou(a, far) == pytest.approx(-(100.0 / 300.0))
    with pytest.raises(ValueError):
        iou(a, BoxXYWH(0, 0, 10, 10, "patch"))


def test_make_crop_requires_image_box():
    with pytest.raises(ValueError):
        make_crop(BoxXYWH(0, 0, 10, 10, "patch"))
    with pytest.raises(ValueError):
        make_crop(BoxXYWH(0, 0, 10, 10), factor=1.0)
    crop = make_crop(BoxXYWH(0, 0, 16, 4), 5.0, 288)
    assert crop.scale == pytest.approx(5.0 * 8 / 288)


def test_make_labels_stacks():
    boxes = [BoxXYWH(10, 10, 20, 20, "patch"), BoxXYWH(30, 5, 8, 9, "patch")]
    labels, ltrb = make_labels(boxes, 4, 16, 0.25)
    assert labels.shape == (2, 4, 4)
    assert ltrb.shape == (2, 4, 4, 4)


def test_paired_giou_matches_box_giou():
    a = BoxXYWH(0, 0, 10, 10)
    b = BoxXYWH(5, 3, 12, 4)
    t1 = torch.tensor([a.to_xyxy()], dtype=torch.float64)
    t2 = torch.tensor([b.to_xyxy()], dtype=torch.float64)
    assert float(paired_giou(t1, t2)) == pytest.approx(giou(a, b))


def test_cell_boxes():
    ltrb = torch.tensor([[0.1, 0.2, 0.3, 0.4]])
    assert cell_boxes(ltrb).tolist() == pytest.approx([[-0.1, -0.2, 0.3, 0.4]])
