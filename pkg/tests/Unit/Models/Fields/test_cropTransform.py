import numpy as np
import pytest
from tompTracker.geometry import make_crop
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Models.Fields.cropTransform import CropTransform


def test_point_round_trip():
    crop = CropTransform(scale=1.5, offset_x=-10.0, offset_y=4.0, out_px=64)
    x, y = crop.to_image(12.0, 30.0)
    assert (x, y) == (8.0, 49.0)
    assert crop.to_patch(x, y) == pytest.approx((12.0, 30.0))


def test_box_round_trip_and_frame_tags():
    crop = CropTransform(2.0, 5.0, 7.0, 64)
    box = BoxXYWH(25, 27, 10, 8)
    patch_box = crop.box_to_patch(box)
    assert patch_box == BoxXYWH(10, 10, 5, 4, "patch")
    assert crop.box_to_image(patch_box) == box
    with pytest.raises(ValueError):
        crop.box_to_image(box)
    with pytest.raises(ValueError):
        crop.box_to_patch(patch_box)


def test_invalid_transform():
    with pytest.raises(ValueError):
        CropTransform(0.0, 0, 0, 64)
    with pytest.raises(ValueError):
        CropTransform(1.0, 0, 0, 0)


def test_identity_extract_copies_image():
    image = np.random.default_rng(0).integers(0, 256, (32, 32, 3),
                                              dtype=np.uint8)
    patch, mask = CropTransform(1.0, 0.0, 0.0, 32).extract(image)
    assert np.array_equal(patch, image)
    assert not mask.any()


def test_padding_repeats_edge_pixels():
    image = np.zeros((20, 20, 3), dtype=np.uint8)
    image[:, -1] = 200
    crop = CropTransform(1.0, 10.0, 0.0, 20)
    patch, mask = crop.extract(image)
    assert mask[:, 10:].all()
    assert not mask[:, :10].any()
    assert (patch[:, 9:] == 200).all()


def test_crop_centres_target():
    target = BoxXYWH(100, 50, 20, 20)
    crop = make_crop(target, 5.0, 100)
    assert crop.scale == pytest.approx(1.0)
    patch_box = crop.box_to_patch(target)
    assert patch_box.center() == pytest.approx((50.0, 50.0))


def test_search_region_is_five_target_sizes():
    target = BoxXYWH(100, 100, 40, 40)
    crop = make_crop(target, 5.0, 288)
    assert crop.scale * crop.out_px == pytest.approx(200.0)
    assert (crop.offset_x, crop.offset_y) == pytest.approx((20.0, 20.0))
    assert crop.to_image(144.0, 144.0) == pytest.approx((120.0, 120.0))


def test_target_at_the_border_pads_the_crop():
    image = np.zeros((240, 320, 3), dtype=np.uint8)
    crop = make_crop(BoxXYWH(0, 100, 40, 40), 5.0, 64)
    patch, mask = crop.extract(image)
    assert mask.shape == (64, 64)
    assert mask.any()
    assert mask[:, 0].all()
    assert not mask[:, -1].any()
    assert np.array_equal(mask, crop.padding_mask(image.shape))
