"""Structure-edge extraction: gradient operators and edge detectors.

Six methods behind one enum (roberts, prewitt, sobel, log, zerocross,
canny); sobel is the production default. Gradient kernels are applied
as correlation filters (the conventional reading of the operator
matrices), implemented by convolving with the 180-degree-rotated
kernel.
"""

from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

from . import _kernels
from .errors import ParameterError
from .raster import PNG_SAVE_OPTS, FloatPlane, Raster, convolve2d, plane_from_raster

GRADIENT_VARIANTS = ("roberts", "prewitt", "sobel")
VARIANTS = GRADIENT_VARIANTS + ("log", "zerocross", "canny")

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()
PREWITT_X = np.array([[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]], dtype=np.float64)
PREWITT_Y = PREWITT_X.T.copy()
# Diagonal difference pair with taps centered on the pixel so the
# magnitude is exactly 90-degree-rotation equivariant (the classic
# corner-anchored 2x2 pair shifts its response half a pixel).
ROBERTS_X = np.array([[-1, 0, 0], [0, 0, 0], [0, 0, 1]], dtype=np.float64)
ROBERTS_Y = np.array([[0, 0, -1], [0, 0, 0], [1, 0, 0]], dtype=np.float64)

_KERNEL_PAIRS = {
    "sobel": (SOBEL_X, SOBEL_Y),
    "prewitt": (PREWITT_X, PREWITT_Y),
    "roberts": (ROBERTS_X, ROBERTS_Y),
}

DEFAULT_THRESHOLD = 0.25
DEFAULT_LOG_SIGMA = 2.0
DEFAULT_CANNY_SIGMA = 1.4
DEFAULT_CANNY_LOW = 0.1
DEFAULT_CANNY_HIGH = 0.2

# smoothing a constant 8-bit image leaves ~1e-13 rounding dust; responses
# below this floor are treated as exactly zero so relative thresholds
# never latch onto it
NOISE_FLOOR = 1e-6


@dataclass(frozen=True)
class EdgeMethod:
    """One of the six edge detectors plus its parameters.

    threshold: gradient-family cut as a fraction of the max magnitude.
    sigma: Gaussian scale for log/zerocross/canny (None = per-variant default).
    low/high: canny hysteresis thresholds as fractions of the max magnitude.
    zc_slope: zero-crossing slope threshold; None = mean absolute response.
    """

    variant: str
    threshold: float = DEFAULT_THRESHOLD
    sigma: float | None = None
    low: float = DEFAULT_CANNY_LOW
    high: float = DEFAULT_CANNY_HIGH
    zc_slope: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(
                f"unknown edge method {self.variant!r}; choose one of {VARIANTS}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ParameterError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.sigma is not None and self.sigma <= 0.0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 <= self.low <= 1.0 or not 0.0 <= self.high <= 1.0:
            raise ParameterError(
                f"canny thresholds must be in [0, 1], got low={self.low} high={self.high}"
            )
        if self.low > self.high:
            raise ParameterError(
                f"canny low threshold {self.low} exceeds high threshold {self.high}"
            )
        if self.zc_slope is not None and self.zc_slope < 0.0:
            raise ParameterError(f"zero-crossing slope must be >= 0, got {self.zc_slope}")

    def effective_sigma(self):
        if self.sigma is not None:
            return self.sigma
        return DEFAULT_CANNY_SIGMA if self.variant == "canny" else DEFAULT_LOG_SIGMA


class EdgeMap:
    """Binary edge mask, same dimensions as the source image."""

    __slots__ = ("mask",)

    def __init__(self, mask):
        arr = np.asarray(mask)
        if arr.ndim != 2:
            raise ParameterError(f"edge map must be 2-D, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr != 0)
        arr.flags.writeable = False
        object.__setattr__(self, "mask", arr)

    def __setattr__(self, name, value):
        raise AttributeError("EdgeMap is immutable")

    @property
    def height(self):
        return self.mask.shape[0]

    @property
    def width(self):
        return self.mask.shape[1]

    def count(self):
        return int(np.count_nonzero(self.mask))

    def __eq__(self, other):
        return isinstance(other, EdgeMap) and np.array_equal(self.mask, other.mask)

    @classmethod
    def from_png(cls, path):
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
        values = np.unique(arr)
        if not set(values.tolist()) <= {0, 255}:
            raise ParameterError(
                f"edge-map PNG must be 0/255 valued, found values {values.tolist()} in {path}"
            )
        return cls(arr == 255)

    def to_png(self, path):
        Image.fromarray(np.where(self.mask, 255, 0).astype(np.uint8), mode="L").save(
            path, format="PNG", **PNG_SAVE_OPTS
        )


def correlate(plane: FloatPlane, kernel) -> FloatPlane:
    """Correlation filter = convolution with the 180-degree-rotated kernel."""
    return convolve2d(plane, np.ascontiguousarray(kernel[::-1, ::-1]))


def gradient(img: Raster, operator: str):
    """Apply a gradient operator pair; returns (gx, gy, magnitude) planes."""
    if operator not in _KERNEL_PAIRS:
        raise ParameterError(
            f"unknown gradient operator {operator!r}; choose one of {GRADIENT_VARIANTS}"
        )
    plane = plane_from_raster(img)
    kx, ky = _KERNEL_PAIRS[operator]
    gx = correlate(plane, kx)
    gy = correlate(plane, ky)
    mag = FloatPlane(np.sqrt(gx.values * gx.values + gy.values * gy.values))
    return gx, gy, mag


def gaussian_kernel(sigma):
    """Normalized 2-D Gaussian, radius ceil(3*sigma)."""
    radius = int(np.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    k = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return k / k.sum()


def log_kernel(sigma):
    """Laplacian-of-Gaussian, radius ceil(3*sigma), zero-sum adjusted."""
    radius = int(np.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    r2 = xx * xx + yy * yy
    s2 = sigma * sigma
    k = (r2 - 2.0 * s2) / (s2 * s2) * np.exp(-r2 / (2.0 * s2))
    return k - k.mean()  # exact zero response on constants


def _threshold_gradient(img, method):
    _, _, mag = gradient(img, method.variant)
    peak = float(mag.values.max())
    return mag.values > method.threshold * peak


def _zero_crossing_edges(img, method):
    plane = plane_from_raster(img)
    resp = convolve2d(plane, log_kernel(method.effective_sigma()))
    if float(np.max(np.abs(resp.values))) < NOISE_FLOOR:
        return np.zeros(resp.values.shape, dtype=bool)
    slope = method.zc_slope
    if slope is None:
        slope = float(np.mean(np.abs(resp.values)))
    out = _kernels.zero_crossings(_kernels.as_plane(resp.values), float(slope))
    return out != 0


def _canny_edges(img, method):
    plane = plane_from_raster(img)
    smoothed = convolve2d(plane, gaussian_kernel(method.effective_sigma()))
    kx, ky = _KERNEL_PAIRS["sobel"]
    gx = correlate(smoothed, kx)
    gy = correlate(smoothed, ky)
    mag = np.sqrt(gx.values * gx.values + gy.values * gy.values)
    if float(mag.max()) < NOISE_FLOOR:
        return np.zeros(mag.shape, dtype=bool)
    thin = _kernels.nms(
        _kernels.as_plane(mag), _kernels.as_plane(gx.values), _kernels.as_plane(gy.values)
    )
    peak = float(thin.max())
    if peak == 0.0:
        return np.zeros(mag.shape, dtype=bool)
    strong = thin > method.high * peak
    weak = (thin > method.low * peak) & ~strong
    out = _kernels.hysteresis(_kernels.as_mask(strong), _kernels.as_mask(weak))
    return out != 0


def detect_edges(img: Raster, method: EdgeMethod) -> EdgeMap:
    """Run the configured detector on a grayscale raster."""
    if img.channels != 1:
        raise ParameterError("detect_edges expects grayscale; convert with to_grayscale")
    if method.variant in GRADIENT_VARIANTS:
        return EdgeMap(_threshold_gradient(img, method))
    if method.variant in ("log", "zerocross"):
        return EdgeMap(_zero_crossing_edges(img, method))
    return EdgeMap(_canny_edges(img, method))


def dilate(edge_map: EdgeMap, radius: int) -> EdgeMap:
    """Morphological dilation with a (2*radius+1) square element."""
    if radius < 0:
        raise ParameterError(f"dilation radius must be >= 0, got {radius}")
    if radius == 0:
        return edge_map
    out = _kernels.dilate_square(_kernels.as_mask(edge_map.mask), int(radius))
    return EdgeMap(out != 0)


def method_from_options(
    variant,
    threshold=None,
    sigma=None,
    low=None,
    high=None,
    zc_slope=None,
) -> EdgeMethod:
    """Build an EdgeMethod from optional CLI-style overrides."""
    method = EdgeMethod(variant=variant)
    updates = {}
    if threshold is not None:
        updates["threshold"] = threshold
    if sigma is not None:
        updates["sigma"] = sigma
    if low is not None:
        updates["low"] = low
    if high is not None:
        updates["high"] = high
    if zc_slope is not None:
        updates["zc_slope"] = zc_slope
    return replace(method, **updates) if updates else method
