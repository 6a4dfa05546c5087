"""PNG pairs in, tensors out, and back again.

Labels are {0,1,2}-valued single-channel PNGs and become one-hot float
planes. Images are RGB and live in [-1, 1] inside the model, matching
the tanh output head.
"""

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .errors import DataError

NUM_CLASSES = 3


def load_label(path):
    """{0,1,2} PNG -> float32 one-hot tensor of shape (3, H, W)."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img)
    except (OSError, SyntaxError) as exc:
        raise DataError(f"cannot read label {path}: {exc}") from exc
    if arr.ndim != 2:
        raise DataError(f"label {path} must be single-channel, got shape {arr.shape}")
    bad = sorted(int(v) for v in np.unique(arr) if v >= NUM_CLASSES)
    if bad:
        raise DataError(
            f"label {path} has values outside 0..2: {', '.join(str(v) for v in bad)}"
        )
    planes = np.stack([(arr == k) for k in range(NUM_CLASSES)])
    return torch.from_numpy(planes.astype(np.float32))


def load_image(path):
    """RGB PNG -> float32 tensor of shape (3, H, W) in [-1, 1]."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"))
    except (OSError, SyntaxError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    scaled = arr.astype(np.float32) / 127.5 - 1.0
    return torch.from_numpy(np.ascontiguousarray(scaled.transpose(2, 0, 1)))


def image_to_png(tensor, path):
    """(3, H, W) tensor in [-1, 1] -> 8-bit RGB PNG."""
    if tensor.ndim != 3 or tensor.shape[0] != 3:
        raise DataError(f"expected a (3, H, W) tensor, got {tuple(tensor.shape)}")
    arr = tensor.detach().cpu().numpy().transpose(1, 2, 0)
    # floor(v + 0.5) so rounding never depends on the libm in use
    quantized = np.floor(np.clip(arr, -1.0, 1.0) * 127.5 + 127.5 + 0.5)
    Image.fromarray(np.clip(quantized, 0, 255).astype(np.uint8), mode="RGB").save(path)


def load_pairs(labels_dir, images_dir):
    """Match *.png by basename across the two directories.

    Returns a list of (name, label_tensor, image_tensor), sorted by name.
    """
    labels_dir = Path(labels_dir)
    images_dir = Path(images_dir)
    label_files = sorted(labels_dir.glob("*.png"))
    if not label_files:
        raise DataError(f"no label PNGs in {labels_dir}")
    pairs = []
    for label_path in label_files:
        image_path = images_dir / label_path.name
        if not image_path.is_file():
            raise DataError(f"no image for label {label_path.name} in {images_dir}")
        label = load_label(label_path)
        image = load_image(image_path)
        if label.shape[1:] != image.shape[1:]:
            raise DataError(
                f"{label_path.name}: label is {tuple(label.shape[1:])} "
                f"but image is {tuple(image.shape[1:])}"
            )
        pairs.append((label_path.name, label, image))
    return pairs
