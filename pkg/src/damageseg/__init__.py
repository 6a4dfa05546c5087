"""damageseg: dataset construction, synthetic-augmentation bridging,
and evaluation for damage-region segmentation.

The compiled kernel backend is selected at import time; see
damageseg._kernels.use_backend / available_backends to inspect or
override it.
"""

from ._kernels import available_backends, backend_name, use_backend
from .edges import EdgeMap, EdgeMethod, detect_edges
from .errors import (
    DamagesegError,
    DimensionMismatchError,
    GeneratorError,
    LabelDecodeError,
    ManifestError,
    ParameterError,
)
from .genbridge import (
    GeneratorSpec,
    SyntheticBatch,
    merge_synthetic,
    reference_generate,
    run_generator,
)
from .labels import RoiMask, TriLabel, compose_trilabel, split_trilabel
from .manifest import DatasetManifest, TileRecord
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    bf_score,
    confusion,
    evaluate_run,
    iou,
    precision_recall,
)
from .pipeline import ClassWeights, class_weights, partition, random_crops, tile
from .raster import FloatPlane, Raster, to_grayscale
from .report import RunComparison, render_comparison, render_overlay

__version__ = "0.1.0"

__all__ = [
    "ClassWeights",
    "ConfusionMatrix",
    "DamagesegError",
    "DatasetManifest",
    "DimensionMismatchError",
    "EdgeMap",
    "EdgeMethod",
    "FloatPlane",
    "GeneratorError",
    "GeneratorSpec",
    "LabelDecodeError",
    "ManifestError",
    "MetricsReport",
    "ParameterError",
    "Raster",
    "RoiMask",
    "RunComparison",
    "SyntheticBatch",
    "TileRecord",
    "TriLabel",
    "available_backends",
    "backend_name",
    "bf_score",
    "class_weights",
    "compose_trilabel",
    "confusion",
    "detect_edges",
    "evaluate_run",
    "iou",
    "merge_synthetic",
    "partition",
    "precision_recall",
    "random_crops",
    "reference_generate",
    "render_comparison",
    "render_overlay",
    "run_generator",
    "split_trilabel",
    "tile",
    "to_grayscale",
    "use_backend",
    "__version__",
]
