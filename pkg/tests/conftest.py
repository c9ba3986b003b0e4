from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from woundlocal.annotations import ImageAnnotation
from woundlocal.geometry import BBox

FIXTURES = Path(__file__).parent / "fixtures"


def random_bbox(rng: np.random.Generator, min_size: float = 0.01) -> BBox:
    w = rng.uniform(min_size, 1.0)
    h = rng.uniform(min_size, 1.0)
    cx = rng.uniform(w / 2, 1.0 - w / 2)
    cy = rng.uniform(h / 2, 1.0 - h / 2)
    return BBox(cx, cy, w, h)


def random_annotation(rng: np.random.Generator, image_id: str, n_classes: int = 1) -> ImageAnnotation:
    img_w = int(rng.integers(50, 800))
    img_h = int(rng.integers(50, 800))
    boxes = []
    for _ in range(int(rng.integers(0, 6))):
        # Keep boxes at least 3px so VOC integer rounding cannot collapse them.
        b = random_bbox(rng, min_size=3.0 / min(img_w, img_h))
        boxes.append((int(rng.integers(0, n_classes)), b))
    return ImageAnnotation(image_id, img_w, img_h, tuple(boxes))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
