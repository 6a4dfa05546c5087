"""Desk-scale L1-conditional GAN for label-to-photo tile translation."""

from .config import LOG_COLUMNS, TrainConfig, TrainLog
from .data import image_to_png, load_image, load_label, load_pairs
from .errors import ConfigError, DataError, L1cganError, ServeError, TrainError
from .models import PatchDiscriminator, UNetGenerator
from .serve import serve_protocol
from .train import load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "LOG_COLUMNS",
    "TrainConfig",
    "TrainLog",
    "image_to_png",
    "load_image",
    "load_label",
    "load_pairs",
    "ConfigError",
    "DataError",
    "L1cganError",
    "ServeError",
    "TrainError",
    "PatchDiscriminator",
    "UNetGenerator",
    "serve_protocol",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "__version__",
]
