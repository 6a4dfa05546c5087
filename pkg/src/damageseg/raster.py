"""Pixel-grid types, grayscale conversion, convolution, and PNG I/O.

Rasters are thin immutable wrappers over uint8 numpy arrays: (h, w) for
grayscale, (h, w, 3) for RGB. All gradient math happens on FloatPlane
(float64); quantization back to 8 bits only happens when a file is
written.
"""

import numpy as np
from PIL import Image

from . import _kernels
from .errors import DimensionMismatchError, ParameterError

# ITU-R 601 luma triple
LUMA_R = 0.299
LUMA_G = 0.587
LUMA_B = 0.114

# Pinned PNG encoder settings so identical pixels give identical bytes.
PNG_SAVE_OPTS = {"optimize": False, "compress_level": 6}


def round_half_up(values):
    """Elementwise round-half-up (numpy's round() is round-half-even)."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


class Raster:
    """8-bit image, grayscale (h, w) or RGB (h, w, 3), immutable."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.dtype != np.uint8:
            raise ParameterError(f"raster samples must be uint8, got {arr.dtype}")
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ParameterError(
                f"raster shape must be (h, w) or (h, w, 3), got {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParameterError(f"raster dimensions must be >= 1, got {arr.shape}")
        arr = np.ascontiguousarray(arr).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Raster is immutable")

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return 1 if self.pixels.ndim == 2 else 3

    def __eq__(self, other):
        return isinstance(other, Raster) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        kind = "gray" if self.channels == 1 else "rgb"
        return f"Raster({self.width}x{self.height} {kind})"

    @classmethod
    def from_png(cls, path):
        with Image.open(path) as im:
            if im.mode == "L":
                return cls(np.asarray(im, dtype=np.uint8))
            if im.mode == "RGB":
                return cls(np.asarray(im, dtype=np.uint8))
            # palette / RGBA / 1-bit inputs are normalized to RGB or L
            if im.mode in ("P", "RGBA", "CMYK", "YCbCr"):
                return cls(np.asarray(im.convert("RGB"), dtype=np.uint8))
            if im.mode in ("1", "I", "I;16", "F", "LA"):
                return cls(np.asarray(im.convert("L"), dtype=np.uint8))
            raise ParameterError(f"unsupported PNG mode {im.mode!r} in {path}")

    def to_png(self, path):
        mode = "L" if self.channels == 1 else "RGB"
        Image.fromarray(np.asarray(self.pixels), mode=mode).save(
            path, format="PNG", **PNG_SAVE_OPTS
        )


class FloatPlane:
    """2-D float64 field; every value must be finite."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ParameterError(f"plane must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("plane contains non-finite values")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FloatPlane is immutable")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def __repr__(self):
        return f"FloatPlane({self.width}x{self.height})"


def to_grayscale(img: Raster) -> Raster:
    """ITU-R 601 luma conversion; grayscale input passes through."""
    if img.channels == 1:
        return img
    rgb = img.pixels.astype(np.float64)
    luma = LUMA_R * rgb[:, :, 0] + LUMA_G * rgb[:, :, 1] + LUMA_B * rgb[:, :, 2]
    return Raster(np.clip(round_half_up(luma), 0, 255).astype(np.uint8))


def convolve2d(plane: FloatPlane, kernel) -> FloatPlane:
    """True 2-D convolution (kernel flipped) with replicate borders.

    The kernel must have odd sides. Output size equals input size.
    """
    k = np.ascontiguousarray(kernel, dtype=np.float64)
    if k.ndim != 2:
        raise ParameterError(f"kernel must be 2-D, got shape {k.shape}")
    if k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ParameterError(f"kernel sides must be odd, got {k.shape}")
    out = _kernels.convolve2d(_kernels.as_plane(plane.values), k)
    return FloatPlane(out)


def plane_from_raster(img: Raster) -> FloatPlane:
    """Grayscale raster viewed as a float64 plane (no rescaling)."""
    if img.channels != 1:
        raise ParameterError("expected a 1-channel raster; convert with to_grayscale")
    return FloatPlane(img.pixels.astype(np.float64))


def quantize_plane(plane: FloatPlane) -> Raster:
    """Clamp + round a plane into an 8-bit grayscale raster."""
    return Raster(np.clip(round_half_up(plane.values), 0, 255).astype(np.uint8))


def resize_bilinear(img: Raster, width, height) -> Raster:
    """Bilinear resize (half-pixel centers, edge clamp, round half up)."""
    if width < 1 or height < 1:
        raise ParameterError(f"target size must be >= 1, got {width}x{height}")
    out = _kernels.resize_bilinear_u8(np.asarray(img.pixels), int(height), int(width))
    return Raster(out)


def resize_nearest_mask(mask, width, height):
    """Nearest-neighbor resize of a boolean (h, w) mask array."""
    if width < 1 or height < 1:
        raise ParameterError(f"target size must be >= 1, got {width}x{height}")
    out = _kernels.resize_nearest_u8(_kernels.as_mask(mask), int(height), int(width))
    return out != 0


def require_same_shape(what, a_shape, b_shape):
    if tuple(a_shape) != tuple(b_shape):
        raise DimensionMismatchError(what, tuple(a_shape), tuple(b_shape))
