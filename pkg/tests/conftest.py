"""Shared fixtures: deterministic synthetic photos and roi masks."""

import numpy as np
import pytest

from damageseg.labels import RoiMask
from damageseg.raster import Raster


def make_photo(seed, height, width, blob=None):
    """Noisy RGB photo with an optional darker elliptical damage blob.

    blob = (cy, cx, ry, rx); returns (Raster, RoiMask).
    """
    rng = np.random.default_rng(seed)
    img = rng.integers(60, 190, (height, width, 3)).astype(np.uint8)
    mask = np.zeros((height, width), dtype=bool)
    if blob is not None:
        cy, cx, ry, rx = blob
        yy, xx = np.mgrid[0:height, 0:width]
        mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 < 1.0
        img[mask] = (img[mask] * 0.4).astype(np.uint8)
    return Raster(img), RoiMask(mask)


FIXTURE_PHOTOS = (
    # name, seed, h, w, blob
    ("a", 101, 448, 448, (150, 220, 70, 90)),
    ("b", 102, 470, 300, (230, 150, 80, 60)),
    ("c", 103, 380, 520, (190, 260, 60, 110)),
    ("d", 104, 448, 672, (220, 340, 90, 120)),
)


def write_fixture_set(root):
    """The bundled 4-photo set: photos/ and rois/ under `root`."""
    photos = root / "photos"
    rois = root / "rois"
    photos.mkdir(parents=True)
    rois.mkdir(parents=True)
    for name, seed, h, w, blob in FIXTURE_PHOTOS:
        photo, roi = make_photo(seed, h, w, blob)
        photo.to_png(photos / f"{name}.png")
        roi.to_png(rois / f"{name}.png")
    return photos, rois


@pytest.fixture(scope="session")
def fixture_set(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture_photos")
    photos, rois = write_fixture_set(root)
    return {"root": root, "photos": photos, "rois": rois}
