"""Dataset construction: grid tiling with cleansing, median-frequency
class weights, seeded train/test partition, and random-crop
augmentation.

Every operation here is a deterministic function of its inputs and the
seed; the manifest records the seed and parameters so a dataset can be
rebuilt bit-for-bit.
"""

import dataclasses

import numpy as np

from . import _kernels
from .errors import ParameterError
from .labels import RoiMask
from .manifest import DatasetManifest, TileRecord
from .raster import (
    Raster,
    require_same_shape,
    resize_bilinear,
    resize_nearest_mask,
    round_half_up,
)

TILE_SIZE = 224
MIN_KEEP = 128
TRAIN_FRACTION = 0.95
CROP_COUNT = 64
CROP_RETRIES = 16

WEIGHT_CLASSES = ("roi", "background")


@dataclasses.dataclass(frozen=True)
class ClassWeights:
    """Median-frequency balancing weights.

    weight_c = median_over_classes(pixel count) / pixel count_c, so
    weight_c * count_c is the same value for every class by
    construction (for two classes the median is their mean).
    """

    weights: dict
    pixel_counts: dict

    def __post_init__(self):
        object.__setattr__(self, "weights", dict(self.weights))
        object.__setattr__(self, "pixel_counts", dict(self.pixel_counts))
        for cls, w in self.weights.items():
            if not w > 0:
                raise ParameterError(f"class weight {cls} = {w} is not positive")

    def __getitem__(self, cls):
        return self.weights[cls]

    def as_dict(self):
        return dict(self.weights)


@dataclasses.dataclass(frozen=True)
class Tile:
    """One kept tile: aligned image/roi crops plus their record."""

    image: Raster
    roi: RoiMask
    record: TileRecord


def grid_cells(width, height, tile_size):
    """Non-overlapping cells anchored at (0, 0), stride = tile_size.

    Yields (offset_x, offset_y, native_w, native_h); edge cells carry
    the remainder. The cells partition the image exactly.
    """
    if tile_size < 1:
        raise ParameterError(f"tile_size must be >= 1, got {tile_size}")
    for oy in range(0, height, tile_size):
        for ox in range(0, width, tile_size):
            yield ox, oy, min(tile_size, width - ox), min(tile_size, height - oy)


def tile(photo: Raster, roi: RoiMask, tile_size=TILE_SIZE, min_keep=MIN_KEEP,
         photo_id="photo"):
    """Cut a photo into stored tiles, dropping unusable cells.

    Remainder cells are kept only if both native dimensions reach
    min_keep, then resized up to tile_size (image bilinear, roi
    nearest). Cells with an empty roi are dropped.
    """
    if not tile_size > min_keep > 0:
        raise ParameterError(
            f"need tile_size > min_keep > 0, got {tile_size} and {min_keep}"
        )
    require_same_shape(
        "tile(photo, roi)", (photo.height, photo.width), roi.mask.shape
    )
    tiles = []
    for ox, oy, nw, nh in grid_cells(photo.width, photo.height, tile_size):
        if nw < min_keep or nh < min_keep:
            continue
        roi_crop = roi.mask[oy : oy + nh, ox : ox + nw]
        if not roi_crop.any():
            continue
        img_crop = Raster(photo.pixels[oy : oy + nh, ox : ox + nw])
        if nw != tile_size or nh != tile_size:
            img_crop = resize_bilinear(img_crop, tile_size, tile_size)
            roi_crop = resize_nearest_mask(roi_crop, tile_size, tile_size)
        tile_id = f"{photo_id}_x{ox}_y{oy}"
        record = TileRecord(
            tile_id=tile_id,
            source_photo_id=photo_id,
            offset_x=ox,
            offset_y=oy,
            native_w=nw,
            native_h=nh,
            stored_size=tile_size,
            split="train",
            provenance="real",
            image_path=f"images/{tile_id}.png",
            label_path=f"labels/{tile_id}.png",
        )
        tiles.append(Tile(image=img_crop, roi=RoiMask(roi_crop), record=record))
    return tiles


def crop_like(record: TileRecord, plane, nearest=False):
    """Re-crop any photo-aligned raster with a record's geometry.

    Used to cut label planes with exactly the same crop + resize the
    record's image tile got. `plane` is a 2-D uint8 array; nearest=True
    selects nearest-neighbor resizing (for label values), else bilinear.
    """
    arr = np.asarray(plane, dtype=np.uint8)
    if arr.ndim != 2:
        raise ParameterError(f"crop_like expects a 2-D plane, got shape {arr.shape}")
    h, w = arr.shape
    if record.offset_y + record.native_h > h or record.offset_x + record.native_w > w:
        raise ParameterError(
            f"{record.tile_id}: tile geometry exceeds plane bounds {w}x{h}"
        )
    crop = arr[
        record.offset_y : record.offset_y + record.native_h,
        record.offset_x : record.offset_x + record.native_w,
    ]
    size = record.stored_size
    if record.native_w == size and record.native_h == size:
        return crop.copy()
    if nearest:
        return _kernels.resize_nearest_u8(np.ascontiguousarray(crop), size, size)
    return _kernels.resize_bilinear_u8(np.ascontiguousarray(crop), size, size)


def class_weights(rois) -> ClassWeights:
    """Median-frequency weights over the roi labels of a tile set."""
    rois = list(rois)
    if not rois:
        raise ParameterError("class_weights needs at least one tile")
    roi_px = sum(r.count() for r in rois)
    total = sum(r.mask.size for r in rois)
    counts = {"roi": roi_px, "background": total - roi_px}
    for cls, n in counts.items():
        if n == 0:
            raise ParameterError(
                f"class {cls!r} absent from the dataset; its weight is undefined"
            )
    median = (counts["roi"] + counts["background"]) / 2
    weights = {cls: median / counts[cls] for cls in WEIGHT_CLASSES}
    return ClassWeights(weights=weights, pixel_counts=counts)


def partition(manifest: DatasetManifest, train_fraction=TRAIN_FRACTION, seed=0,
              grouped=True) -> DatasetManifest:
    """Assign train/test splits by seeded uniform shuffle.

    Train count = round-half-up(N * fraction). With grouped=True (the
    default) all tiles of one source photo land in the same split, so
    the train count may overshoot the target by part of one photo's
    tile group; grouped=False hits the count exactly.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must be in (0, 1), got {train_fraction}")
    records = manifest.records
    if not records:
        raise ParameterError("cannot partition an empty manifest")
    if any(r.provenance != "real" for r in records):
        raise ParameterError(
            "partition runs before synthetic merge; re-splitting synthetic "
            "records could contaminate the test split"
        )
    n = len(records)
    target = int(round_half_up(n * train_fraction))
    rng = np.random.default_rng(seed)
    if grouped:
        photo_order = []
        group_size = {}
        for rec in records:
            if rec.source_photo_id not in group_size:
                photo_order.append(rec.source_photo_id)
                group_size[rec.source_photo_id] = 0
            group_size[rec.source_photo_id] += 1
        train_photos = set()
        assigned = 0
        for idx in rng.permutation(len(photo_order)):
            if assigned >= target:
                break
            pid = photo_order[int(idx)]
            train_photos.add(pid)
            assigned += group_size[pid]
        new_records = tuple(
            dataclasses.replace(
                r, split="train" if r.source_photo_id in train_photos else "test"
            )
            for r in records
        )
    else:
        train_idx = {int(i) for i in rng.permutation(n)[:target]}
        new_records = tuple(
            dataclasses.replace(r, split="train" if i in train_idx else "test")
            for i, r in enumerate(records)
        )
    return manifest.replace(
        records=new_records,
        train_fraction=train_fraction,
        grouped=grouped,
        rng_seed=seed,
    )


def random_crops(photo: Raster, roi: RoiMask, count=CROP_COUNT, crop=TILE_SIZE,
                 seed=0, photo_id="photo", retries=CROP_RETRIES):
    """Standard augmentation: `count` aligned random crops per photo.

    Photos smaller than the crop size are first upscaled (image
    bilinear, roi nearest) to the crop size in the short dimension.
    Crops with zero roi pixels are redrawn up to `retries` times, then
    kept as-is so the count is always met.
    """
    if count < 1:
        raise ParameterError(f"crop count must be >= 1, got {count}")
    if crop < 1:
        raise ParameterError(f"crop size must be >= 1, got {crop}")
    require_same_shape(
        "random_crops(photo, roi)", (photo.height, photo.width), roi.mask.shape
    )
    w = max(photo.width, crop)
    h = max(photo.height, crop)
    if (w, h) != (photo.width, photo.height):
        photo = resize_bilinear(photo, w, h)
        roi = RoiMask(resize_nearest_mask(roi.mask, w, h))
    rng = np.random.default_rng(seed)
    tiles = []
    for k in range(count):
        ox = oy = 0
        roi_crop = None
        for _ in range(retries + 1):
            ox = int(rng.integers(0, w - crop + 1))
            oy = int(rng.integers(0, h - crop + 1))
            roi_crop = roi.mask[oy : oy + crop, ox : ox + crop]
            if roi_crop.any():
                break
        img_crop = Raster(photo.pixels[oy : oy + crop, ox : ox + crop])
        tile_id = f"{photo_id}_crop{k:03d}"
        record = TileRecord(
            tile_id=tile_id,
            source_photo_id=photo_id,
            offset_x=ox,
            offset_y=oy,
            native_w=crop,
            native_h=crop,
            stored_size=crop,
            split="train",
            provenance="real",
            image_path=f"images/{tile_id}.png",
            label_path=f"labels/{tile_id}.png",
        )
        tiles.append(Tile(image=img_crop, roi=RoiMask(roi_crop), record=record))
    return tiles
