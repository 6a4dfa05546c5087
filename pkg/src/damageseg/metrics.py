"""Segmentation evaluation: confusion matrices, IoU, precision/recall,
and boundary-F1 (BF).

Zero-denominator metrics are reported as undefined (None), never as 0
or 1, and undefined values are excluded from means. The confusion
matrix is the single source for IoU/precision/recall; BF works on
boundary geometry and is always aggregated per image.
"""

import json
import math

import numpy as np

from . import _kernels
from .errors import ParameterError
from .labels import RoiMask
from .raster import require_same_shape, round_half_up

CLASSES = ("roi", "background")

BF_TOLERANCE_DIAGONAL_FRACTION = 0.0075


class ConfusionMatrix:
    """Square per-(true, predicted) pixel tallies; addition composes."""

    __slots__ = ("classes", "counts")

    def __init__(self, classes, counts):
        counts = np.asarray(counts, dtype=np.int64)
        classes = tuple(classes)
        if counts.shape != (len(classes), len(classes)):
            raise ParameterError(
                f"counts shape {counts.shape} does not match {len(classes)} classes"
            )
        if (counts < 0).any():
            raise ParameterError("confusion counts must be non-negative")
        counts = counts.copy()
        counts.flags.writeable = False
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "counts", counts)

    def __setattr__(self, name, value):
        raise AttributeError("ConfusionMatrix is immutable")

    def __add__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        if self.classes != other.classes:
            raise ParameterError(
                f"cannot add confusion matrices over {self.classes} and {other.classes}"
            )
        return ConfusionMatrix(self.classes, self.counts + other.counts)

    def total(self):
        return int(self.counts.sum())

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.classes == other.classes
            and np.array_equal(self.counts, other.counts)
        )

    def tp(self, cls):
        i = self.classes.index(cls)
        return int(self.counts[i, i])

    def fp(self, cls):
        i = self.classes.index(cls)
        return int(self.counts[:, i].sum() - self.counts[i, i])

    def fn(self, cls):
        i = self.classes.index(cls)
        return int(self.counts[i, :].sum() - self.counts[i, i])


def confusion(gt: RoiMask, pred: RoiMask) -> ConfusionMatrix:
    """2x2 tallies over (roi, background) for one mask pair."""
    require_same_shape("confusion(gt, pred)", gt.mask.shape, pred.mask.shape)
    tp, fp, fn, tn = _kernels.confusion_binary(
        _kernels.as_mask(gt.mask), _kernels.as_mask(pred.mask)
    )
    # rows = true class, columns = predicted class, order (roi, background)
    return ConfusionMatrix(CLASSES, [[tp, fn], [fp, tn]])


def mean_defined(values):
    """Arithmetic mean of the non-None entries; None if all are None."""
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def iou(cm: ConfusionMatrix):
    """Per-class IoU dict plus mean over defined classes."""
    per_class = {}
    for cls in cm.classes:
        denom = cm.tp(cls) + cm.fp(cls) + cm.fn(cls)
        per_class[cls] = cm.tp(cls) / denom if denom else None
    return per_class, mean_defined(per_class.values())


def precision_recall(cm: ConfusionMatrix):
    """Per-class precision and recall dicts; None on zero denominators."""
    precision = {}
    recall = {}
    for cls in cm.classes:
        p_denom = cm.tp(cls) + cm.fp(cls)
        r_denom = cm.tp(cls) + cm.fn(cls)
        precision[cls] = cm.tp(cls) / p_denom if p_denom else None
        recall[cls] = cm.tp(cls) / r_denom if r_denom else None
    return precision, recall


def default_bf_tolerance(width, height):
    """round(0.75% of the image diagonal), at least 1 pixel."""
    diag = math.sqrt(width * width + height * height)
    return max(1, int(round_half_up(BF_TOLERANCE_DIAGONAL_FRACTION * diag)))


def _disk_offsets(tolerance):
    r = int(math.floor(tolerance))
    offsets = [
        (dr, dc)
        for dr in range(-r, r + 1)
        for dc in range(-r, r + 1)
        if dr * dr + dc * dc <= tolerance * tolerance
    ]
    return np.asarray(offsets, dtype=np.int64).reshape(-1, 2)


def _boundary_match_fraction(candidates, reference, offsets):
    """Fraction of candidate boundary pixels within tolerance of the
    reference boundary ((dr, dc) offsets encode the distance disk)."""
    total = int(candidates.sum())
    if total == 0:
        return None
    reach = _kernels.dilate_offsets(np.ascontiguousarray(reference), offsets)
    matched = int(np.count_nonzero((candidates != 0) & (reach != 0)))
    return matched / total


def bf_score(gt: RoiMask, pred: RoiMask, tolerance=None):
    """Boundary-F1 per class at a Euclidean pixel tolerance.

    Boundary pixels are class pixels with a differing 4-neighbor or on
    the image border. Undefined (None) when the class is absent from
    both masks; 0 when present on one side only.
    """
    require_same_shape("bf_score(gt, pred)", gt.mask.shape, pred.mask.shape)
    if tolerance is None:
        tolerance = default_bf_tolerance(gt.width, gt.height)
    if tolerance < 0:
        raise ParameterError(f"bf tolerance must be >= 0, got {tolerance}")
    offsets = _disk_offsets(tolerance)
    scores = {}
    for cls in CLASSES:
        if cls == "roi":
            gt_cls, pred_cls = gt.mask, pred.mask
        else:
            gt_cls, pred_cls = ~gt.mask, ~pred.mask
        if not gt_cls.any() and not pred_cls.any():
            scores[cls] = None
            continue
        gt_boundary = _kernels.boundary4(_kernels.as_mask(gt_cls))
        pred_boundary = _kernels.boundary4(_kernels.as_mask(pred_cls))
        precision = _boundary_match_fraction(pred_boundary, gt_boundary, offsets)
        recall = _boundary_match_fraction(gt_boundary, pred_boundary, offsets)
        p = 0.0 if precision is None else precision
        r = 0.0 if recall is None else recall
        scores[cls] = 2.0 * p * r / (p + r) if p + r > 0.0 else 0.0
    return scores


class MetricsReport:
    """Per-class and mean metrics for one evaluation run."""

    __slots__ = ("mode", "image_count", "per_class", "mean_iou", "bf_tolerance")

    def __init__(self, mode, image_count, per_class, bf_tolerance=None):
        if mode not in ("global", "per-image-mean"):
            raise ParameterError(f"unknown aggregation mode {mode!r}")
        if image_count < 1:
            raise ParameterError("a metrics report needs at least one image")
        for cls, values in per_class.items():
            for name, v in values.items():
                if v is not None and not 0.0 <= v <= 1.0 + 1e-12:
                    raise ParameterError(
                        f"{name}[{cls}] = {v} outside [0, 1]"
                    )
        # canonical class order survives JSON round-trips (sort_keys)
        ordered = {c: dict(per_class[c]) for c in CLASSES if c in per_class}
        for c in sorted(per_class):
            if c not in ordered:
                ordered[c] = dict(per_class[c])
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "image_count", int(image_count))
        object.__setattr__(self, "per_class", ordered)
        object.__setattr__(
            self, "mean_iou", mean_defined(v["iou"] for v in per_class.values())
        )
        object.__setattr__(self, "bf_tolerance", bf_tolerance)

    def __setattr__(self, name, value):
        raise AttributeError("MetricsReport is immutable")

    @property
    def classes(self):
        return tuple(self.per_class)

    def to_dict(self):
        return {
            "mode": self.mode,
            "image_count": self.image_count,
            "bf_tolerance": self.bf_tolerance,
            "classes": list(self.per_class),
            "per_class": self.per_class,
            "mean_iou": self.mean_iou,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, payload):
        try:
            return cls(
                mode=payload["mode"],
                image_count=payload["image_count"],
                per_class=payload["per_class"],
                bf_tolerance=payload.get("bf_tolerance"),
            )
        except KeyError as exc:
            raise ParameterError(f"metrics report payload missing key {exc}") from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def evaluate_run(pairs, mode="per-image-mean", bf_tolerance=None) -> MetricsReport:
    """Score a list of (gt, pred) RoiMask pairs.

    global: sum confusion matrices, compute IoU/precision/recall once.
    per-image-mean: compute per image, average defined values.
    BF is always aggregated per image (boundary matching is per-image
    by nature).
    """
    pairs = list(pairs)
    if not pairs:
        raise ParameterError("evaluate_run needs at least one (gt, pred) pair")
    matrices = [confusion(gt, pred) for gt, pred in pairs]
    bf_per_image = [bf_score(gt, pred, bf_tolerance) for gt, pred in pairs]

    per_class = {cls: {} for cls in CLASSES}
    if mode == "global":
        total = matrices[0]
        for cm in matrices[1:]:
            total = total + cm
        iou_values, _ = iou(total)
        prec, rec = precision_recall(total)
        for cls in CLASSES:
            per_class[cls]["iou"] = iou_values[cls]
            per_class[cls]["precision"] = prec[cls]
            per_class[cls]["recall"] = rec[cls]
    elif mode == "per-image-mean":
        per_image = []
        for cm in matrices:
            iou_values, _ = iou(cm)
            prec, rec = precision_recall(cm)
            per_image.append((iou_values, prec, rec))
        for cls in CLASSES:
            per_class[cls]["iou"] = mean_defined(v[0][cls] for v in per_image)
            per_class[cls]["precision"] = mean_defined(v[1][cls] for v in per_image)
            per_class[cls]["recall"] = mean_defined(v[2][cls] for v in per_image)
    else:
        raise ParameterError(f"unknown aggregation mode {mode!r}")

    for cls in CLASSES:
        per_class[cls]["bf"] = mean_defined(b[cls] for b in bf_per_image)

    return MetricsReport(
        mode=mode, image_count=len(pairs), per_class=per_class, bf_tolerance=bf_tolerance
    )
