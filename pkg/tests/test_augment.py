import numpy as np
import pytest

from conftest import random_bbox
from oracles import blur_box_filter, rotate_box_corners
from woundlocal.annotations import ImageAnnotation
from woundlocal.augment import (
    AugmentError,
    AugmentSpec,
    RasterImage,
    blur,
    expand_dataset,
    flip_right,
    flip_up,
    rotate,
)
from woundlocal.geometry import BBox


def random_image(rng, w=8, h=6):
    return RasterImage(rng.integers(0, 256, (h, w, 3), dtype=np.uint8))


class TestFlips:
    def test_flip_right_mirrors_cx(self):
        img = random_image(np.random.default_rng(0))
        _, boxes = flip_right(img, [BBox(0.25, 0.5, 0.1, 0.1)])
        assert boxes == [BBox(0.75, 0.5, 0.1, 0.1)]

    def test_flip_right_fixed_point(self):
        img = random_image(np.random.default_rng(0))
        _, boxes = flip_right(img, [BBox(0.5, 0.5, 0.3, 0.4)])
        assert boxes == [BBox(0.5, 0.5, 0.3, 0.4)]

    def test_flip_up_corner_box(self):
        img = random_image(np.random.default_rng(0))
        _, boxes = flip_up(img, [BBox(0.05, 0.05, 0.1, 0.1)])
        assert boxes[0] == BBox(0.05, 0.95, 0.1, 0.1)

    @pytest.mark.parametrize("op", [flip_right, flip_up])
    def test_involution(self, op):
        rng = np.random.default_rng(1)
        img = random_image(rng)
        boxes = [random_bbox(rng) for _ in range(4)]
        img2, boxes2 = op(*op(img, boxes))
        assert np.array_equal(img.pixels, img2.pixels)
        for b1, b2 in zip(boxes, boxes2):
            assert b1.cx == pytest.approx(b2.cx) and b1.cy == pytest.approx(b2.cy)
            assert (b1.w, b1.h) == (b2.w, b2.h)


class TestRotation:
    def test_rot180_point_reflection(self):
        img = random_image(np.random.default_rng(2))
        _, boxes = rotate(img, [BBox(0.25, 0.25, 0.1, 0.2)], 180)
        assert boxes == [BBox(0.75, 0.75, 0.1, 0.2)]

    def test_rot90_cw_example(self):
        img = random_image(np.random.default_rng(2))
        _, boxes = rotate(img, [BBox(0.5, 0.25, 0.2, 0.1)], 90)
        assert boxes == [BBox(0.75, 0.5, 0.1, 0.2)]

    def test_rot90_pixels_match_box_map(self):
        # A single marked pixel must land where the box map says it should.
        px = np.zeros((4, 4, 3), dtype=np.uint8)
        px[0, 1] = 255  # normalized center (.375, .125)
        out, boxes = rotate(RasterImage(px), [BBox(0.375, 0.125, 0.25, 0.25)], 90)
        b = boxes[0]
        i = int(b.cy * out.height)
        j = int(b.cx * out.width)
        assert tuple(out.pixels[i, j]) == (255, 255, 255)

    def test_four_rot90_is_identity(self):
        rng = np.random.default_rng(3)
        img = random_image(rng)
        boxes = [random_bbox(rng) for _ in range(3)]
        cur_img, cur_boxes = img, boxes
        for _ in range(4):
            cur_img, cur_boxes = rotate(cur_img, cur_boxes, 90)
        assert np.array_equal(img.pixels, cur_img.pixels)
        for b1, b2 in zip(boxes, cur_boxes):
            for v1, v2 in zip((b1.cx, b1.cy, b1.w, b1.h), (b2.cx, b2.cy, b2.w, b2.h)):
                assert v1 == pytest.approx(v2, abs=1e-12)

    def test_right_angles_match_corner_oracle(self):
        # Square image so the oracle's fixed (0.5, 0.5) pivot applies.
        rng = np.random.default_rng(4)
        img = random_image(rng, w=8, h=8)
        for _ in range(500):
            b = random_bbox(rng)
            for theta in (90, 180, 270):
                _, boxes = rotate(img, [b], theta)
                got = boxes[0]
                cx, cy, w, h = rotate_box_corners(b.cx, b.cy, b.w, b.h, theta)
                assert got.cx == pytest.approx(cx, abs=1e-9)
                assert got.cy == pytest.approx(cy, abs=1e-9)
                assert got.w == pytest.approx(w, abs=1e-9)
                assert got.h == pytest.approx(h, abs=1e-9)

    def test_right_angles_preserve_area(self):
        rng = np.random.default_rng(5)
        img = random_image(rng, w=8, h=8)
        for theta in (90, 180, 270):
            b = random_bbox(rng)
            _, boxes = rotate(img, [b], theta)
            assert boxes[0].area == pytest.approx(b.area)

    def test_arbitrary_angle_hull_never_shrinks(self):
        rng = np.random.default_rng(6)
        img = random_image(rng, w=40, h=30)
        for _ in range(50):
            b = random_bbox(rng, min_size=0.05)
            theta = float(rng.uniform(1, 359))
            if theta in (90.0, 180.0, 270.0):
                continue
            out, boxes = rotate(img, [b], theta)
            # True rotated-box area in output-canvas normalized units.
            in_area_px = b.w * img.width * b.h * img.height
            hull_area_px = boxes[0].w * out.width * boxes[0].h * out.height
            assert hull_area_px >= in_area_px - 1e-6

    def test_angle_out_of_range(self):
        img = random_image(np.random.default_rng(0))
        for theta in (0, 360, -5):
            with pytest.raises(AugmentError):
                rotate(img, [], theta)


class TestBlur:
    def test_boxes_unchanged(self):
        rng = np.random.default_rng(7)
        img = random_image(rng)
        boxes = [random_bbox(rng)]
        _, out_boxes = blur(img, boxes, 2)
        assert out_boxes == boxes

    def test_constant_image_unchanged(self):
        img = RasterImage(np.full((5, 5, 3), 77, dtype=np.uint8))
        out, _ = blur(img, [], 1)
        assert np.array_equal(out.pixels, img.pixels)

    def test_single_white_pixel(self):
        px = np.zeros((5, 5, 3), dtype=np.uint8)
        px[2, 2] = 255
        out, _ = blur(RasterImage(px), [], 1)
        patch = out.pixels[1:4, 1:4]
        assert np.all(patch == 28)  # 255/9 rounded
        assert np.all(out.pixels[0, :] == 0)

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(8)
        for radius in (1, 2):
            img = random_image(rng, w=9, h=7)
            out, _ = blur(img, [], radius)
            want = blur_box_filter(img.pixels, radius)
            assert np.array_equal(out.pixels, want)

    def test_radius_validated(self):
        img = random_image(np.random.default_rng(0))
        with pytest.raises(AugmentError):
            blur(img, [], 0)


class TestSpecsAndExpansion:
    def test_parse_specs(self):
        assert AugmentSpec.parse("rot90") == AugmentSpec("rot90")
        assert AugmentSpec.parse("blur:2") == AugmentSpec("blur", 2.0)
        assert AugmentSpec.parse("rot:33.5") == AugmentSpec("rot", 33.5)
        with pytest.raises(AugmentError):
            AugmentSpec.parse("sharpen")

    def test_id_suffixes(self):
        assert AugmentSpec("rot90").id_suffix == "__rot90"
        assert AugmentSpec("flip_up").id_suffix == "__flipup"
        assert AugmentSpec("blur", 2).id_suffix == "__blur2"

    def _items(self, rng, n):
        items = []
        for i in range(n):
            img = random_image(rng)
            boxes = tuple((0, random_bbox(rng)) for _ in range(2))
            items.append((img, ImageAnnotation(f"img{i}", img.width, img.height, boxes)))
        return items

    def test_count_law(self):
        rng = np.random.default_rng(9)
        items = self._items(rng, 3)
        specs = [AugmentSpec("rot90"), AugmentSpec("flip_up"), AugmentSpec("flip_right")]
        out = expand_dataset(items, specs)
        assert len(out) == 3 * (1 + 3)
        assert [a.image_id for _, a in out][:4] == ["img0", "img0__rot90", "img0__flipup", "img0__flipright"]

    def test_empty_specs_identity(self):
        rng = np.random.default_rng(10)
        items = self._items(rng, 2)
        assert expand_dataset(items, []) == items

    def test_box_count_and_classes_preserved(self):
        rng = np.random.default_rng(11)
        items = self._items(rng, 2)
        out = expand_dataset(items, [AugmentSpec("rot90"), AugmentSpec("blur", 1)])
        for _, a in out:
            assert len(a.boxes) == 2
            assert all(cid == 0 for cid, _ in a.boxes)

    def test_determinism(self):
        rng = np.random.default_rng(12)
        items = self._items(rng, 2)
        specs = [AugmentSpec("rot", 33.0), AugmentSpec("blur", 1)]
        out1 = expand_dataset(items, specs)
        out2 = expand_dataset(items, specs)
        for (i1, a1), (i2, a2) in zip(out1, out2):
            assert np.array_equal(i1.pixels, i2.pixels)
            assert a1 == a2
