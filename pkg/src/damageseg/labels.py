"""Tri-categorical labels: background (0), structure edge (1), ROI (2).

The composed label is the generator's conditioning input. On disk it is
a single-channel PNG holding the raw class indices; the display palette
lives in the report module only.
"""

import numpy as np
from PIL import Image

from .edges import EdgeMap
from .errors import LabelDecodeError, ParameterError
from .raster import PNG_SAVE_OPTS, require_same_shape

BACKGROUND = 0
EDGE = 1
ROI = 2


class RoiMask:
    """Binary damage-ROI mask."""

    __slots__ = ("mask",)

    def __init__(self, mask):
        arr = np.asarray(mask)
        if arr.ndim != 2:
            raise ParameterError(f"roi mask must be 2-D, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr != 0)
        arr.flags.writeable = False
        object.__setattr__(self, "mask", arr)

    def __setattr__(self, name, value):
        raise AttributeError("RoiMask is immutable")

    @property
    def height(self):
        return self.mask.shape[0]

    @property
    def width(self):
        return self.mask.shape[1]

    def count(self):
        return int(np.count_nonzero(self.mask))

    def __eq__(self, other):
        return isinstance(other, RoiMask) and np.array_equal(self.mask, other.mask)

    @classmethod
    def from_png(cls, path):
        """Read a binary mask PNG; accepts 0/255 or 0/1 encodings."""
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
        values = set(np.unique(arr).tolist())
        if values <= {0, 255}:
            return cls(arr == 255)
        if values <= {0, 1}:
            return cls(arr == 1)
        raise ParameterError(
            f"mask PNG must be binary (0/255 or 0/1), found values "
            f"{sorted(values)} in {path}"
        )

    def to_png(self, path):
        Image.fromarray(np.where(self.mask, 255, 0).astype(np.uint8), mode="L").save(
            path, format="PNG", **PNG_SAVE_OPTS
        )


class TriLabel:
    """Per-pixel class raster over {0 background, 1 edge, 2 roi}."""

    __slots__ = ("classes",)

    def __init__(self, classes):
        arr = np.asarray(classes)
        if arr.ndim != 2:
            raise ParameterError(f"label must be 2-D, got shape {arr.shape}")
        bad = np.unique(arr[(arr != BACKGROUND) & (arr != EDGE) & (arr != ROI)])
        if bad.size:
            raise ParameterError(
                f"label values must be in {{0, 1, 2}}, found {bad.tolist()}"
            )
        arr = np.ascontiguousarray(arr.astype(np.uint8))
        arr.flags.writeable = False
        object.__setattr__(self, "classes", arr)

    def __setattr__(self, name, value):
        raise AttributeError("TriLabel is immutable")

    @property
    def height(self):
        return self.classes.shape[0]

    @property
    def width(self):
        return self.classes.shape[1]

    def class_counts(self):
        """Pixel count per class, indexed 0..2; always sums to w*h."""
        counts = np.bincount(self.classes.ravel(), minlength=3)
        return int(counts[0]), int(counts[1]), int(counts[2])

    def __eq__(self, other):
        return isinstance(other, TriLabel) and np.array_equal(self.classes, other.classes)


def compose_trilabel(roi: RoiMask, edge: EdgeMap) -> TriLabel:
    """Merge ROI and edge masks; precedence ROI > edge > background."""
    require_same_shape("compose_trilabel(roi, edge)", roi.mask.shape, edge.mask.shape)
    out = np.zeros(roi.mask.shape, dtype=np.uint8)
    out[edge.mask] = EDGE
    out[roi.mask] = ROI
    return TriLabel(out)


def split_trilabel(label: TriLabel):
    """Recover (roi, edge) channels. Edge pixels under ROI are gone:
    split(compose(r, e)) returns e minus r."""
    return RoiMask(label.classes == ROI), EdgeMap(label.classes == EDGE)


def encode_label_png(label: TriLabel, path):
    """Write the raw {0,1,2} class indices as a grayscale PNG."""
    Image.fromarray(np.asarray(label.classes), mode="L").save(
        path, format="PNG", **PNG_SAVE_OPTS
    )


def decode_label_png(path) -> TriLabel:
    """Read a raw-index label PNG; values outside {0,1,2} are an error."""
    with Image.open(path) as im:
        if im.mode != "L":
            if im.mode in ("P", "1", "I", "I;16"):
                im = im.convert("L")
            else:
                raise LabelDecodeError(
                    f"label PNG must be single-channel, got mode {im.mode!r} in {path}"
                )
        arr = np.asarray(im, dtype=np.uint8)
    offending = np.unique(arr[arr > ROI])
    if offending.size:
        raise LabelDecodeError(
            f"label PNG {path} holds values outside {{0, 1, 2}}: {offending.tolist()}"
        )
    return TriLabel(arr)


def roi_from_label_file(path) -> RoiMask:
    """ROI mask from either a tri-label PNG or a binary mask PNG."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    values = set(np.unique(arr).tolist())
    if values <= {0, 1, 2}:
        return RoiMask(arr == ROI)
    if values <= {0, 255}:
        return RoiMask(arr == 255)
    raise LabelDecodeError(
        f"{path} is neither a tri-label ({{0,1,2}}) nor a binary mask (0/255); "
        f"found values {sorted(values)}"
    )
