"""Hot-kernel dispatch: compiled extension when available, numpy otherwise.

The active backend is chosen at import time; set DAMAGESEG_BACKEND to
"python" or "compiled" to force one (forcing "compiled" when the
extension did not build raises at import). Tests and the benchmark use
:func:`use_backend` to switch at runtime.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_KERNEL_NAMES = (
    "convolve2d",
    "dilate_square",
    "dilate_offsets",
    "boundary4",
    "confusion_binary",
    "nms",
    "hysteresis",
    "zero_crossings",
    "resize_bilinear_u8",
    "resize_nearest_u8",
)


def _default_backend():
    forced = os.environ.get("DAMAGESEG_BACKEND")
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"DAMAGESEG_BACKEND={forced!r} requested but only "
                f"{sorted(_BACKENDS)} are available"
            )
        return forced
    return "compiled" if "compiled" in _BACKENDS else "python"


_active = _default_backend()


def available_backends():
    return tuple(sorted(_BACKENDS))


def backend_name():
    return _active


def use_backend(name):
    """Switch the active backend; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_BACKENDS)}")
    previous = _active
    _active = name
    return previous


def _dispatch(name):
    def call(*args, **kwargs):
        return getattr(_BACKENDS[_active], name)(*args, **kwargs)

    call.__name__ = name
    call.__doc__ = getattr(_pykernels, name).__doc__
    return call


convolve2d = _dispatch("convolve2d")
dilate_square = _dispatch("dilate_square")
dilate_offsets = _dispatch("dilate_offsets")
boundary4 = _dispatch("boundary4")
confusion_binary = _dispatch("confusion_binary")
nms = _dispatch("nms")
hysteresis = _dispatch("hysteresis")
zero_crossings = _dispatch("zero_crossings")
resize_bilinear_u8 = _dispatch("resize_bilinear_u8")
resize_nearest_u8 = _dispatch("resize_nearest_u8")


def as_plane(arr):
    """C-contiguous float64 view/copy of a 2-D array."""
    return np.ascontiguousarray(arr, dtype=np.float64)


def as_mask(arr):
    """C-contiguous uint8 0/1 copy of a boolean-like 2-D array."""
    return np.ascontiguousarray((arr != 0).astype(np.uint8))
