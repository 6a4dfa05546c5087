"""Human-facing outputs: ground-truth/prediction overlays and
initial-vs-augmented comparison tables.

Overlay semantics: green = missed (gt only), red = false alarm
(prediction only), yellow = hit (both). Tables render one row per run
with numbers at 4 decimals; with exactly two runs a delta row
(second minus first) is appended.
"""

import csv
import io
import json

import numpy as np

from .errors import ParameterError
from .labels import RoiMask
from .metrics import MetricsReport
from .raster import Raster, require_same_shape, round_half_up

DIM_FACTOR = 0.6
TINT_ALPHA = 0.5
TINT_GT_ONLY = (0, 255, 0)
TINT_PRED_ONLY = (255, 0, 0)
TINT_BOTH = (255, 255, 0)


def render_overlay(photo: Raster, gt: RoiMask, pred: RoiMask) -> Raster:
    """Blend gt/pred disagreement tints over a dimmed photo."""
    require_same_shape(
        "render_overlay(photo, gt)", (photo.height, photo.width), gt.mask.shape
    )
    require_same_shape(
        "render_overlay(gt, pred)", gt.mask.shape, pred.mask.shape
    )
    pixels = photo.pixels
    if pixels.ndim == 2:
        pixels = np.stack([pixels] * 3, axis=-1)
    dimmed = round_half_up(pixels.astype(np.float64) * DIM_FACTOR)

    tint = np.zeros_like(dimmed)
    tinted = np.zeros(gt.mask.shape, dtype=bool)
    for sel, color in (
        (gt.mask & ~pred.mask, TINT_GT_ONLY),
        (~gt.mask & pred.mask, TINT_PRED_ONLY),
        (gt.mask & pred.mask, TINT_BOTH),
    ):
        tint[sel] = color
        tinted |= sel

    out = dimmed.copy()
    blend = round_half_up(
        (1.0 - TINT_ALPHA) * dimmed[tinted] + TINT_ALPHA * tint[tinted]
    )
    out[tinted] = blend
    return Raster(np.clip(out, 0, 255).astype(np.uint8))


class RunComparison:
    """Labeled runs sharing one class set and aggregation mode."""

    __slots__ = ("labels", "reports", "wall_clock")

    def __init__(self, labels, reports, wall_clock=None):
        labels = tuple(labels)
        reports = tuple(reports)
        if not labels or len(labels) != len(reports):
            raise ParameterError("need one label per report, at least one run")
        if len(set(labels)) != len(labels):
            raise ParameterError(f"duplicate run labels in {labels}")
        for rep in reports:
            if not isinstance(rep, MetricsReport):
                raise ParameterError(f"not a metrics report: {rep!r}")
            if rep.classes != reports[0].classes:
                raise ParameterError(
                    f"mixed class sets: {rep.classes} vs {reports[0].classes}"
                )
            if rep.mode != reports[0].mode:
                raise ParameterError(
                    f"mixed aggregation modes: {rep.mode} vs {reports[0].mode}"
                )
        if wall_clock is not None:
            wall_clock = tuple(wall_clock)
            if len(wall_clock) != len(reports):
                raise ParameterError("need one wall-clock entry per run")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "reports", reports)
        object.__setattr__(self, "wall_clock", wall_clock)

    def __setattr__(self, name, value):
        raise AttributeError("RunComparison is immutable")

    def columns(self):
        cols = ["mean_iou"]
        for cls in self.reports[0].classes:
            for metric in ("iou", "precision", "recall", "bf"):
                cols.append(f"{cls}_{metric}")
        if self.wall_clock is not None:
            cols.append("wall_clock_s")
        return cols

    def row(self, i):
        rep = self.reports[i]
        values = {"mean_iou": rep.mean_iou}
        for cls in rep.classes:
            for metric in ("iou", "precision", "recall", "bf"):
                values[f"{cls}_{metric}"] = rep.per_class[cls].get(metric)
        if self.wall_clock is not None:
            values["wall_clock_s"] = self.wall_clock[i]
        return values

    def delta_row(self):
        """(second - first) per column when exactly two runs, else None."""
        if len(self.reports) != 2:
            return None
        a, b = self.row(0), self.row(1)
        return {
            col: None if a[col] is None or b[col] is None else b[col] - a[col]
            for col in self.columns()
        }


def _fmt(value, signed=False):
    if value is None:
        return ""
    if signed:
        return f"{value:+.4f}"
    return f"{value:.4f}"


def render_comparison(cmp: RunComparison, fmt="text") -> str:
    """Render the comparison as an aligned text table, CSV, or JSON."""
    cols = cmp.columns()
    rows = [(cmp.labels[i], cmp.row(i), False) for i in range(len(cmp.labels))]
    delta = cmp.delta_row()
    if delta is not None:
        rows.append(("delta", delta, True))

    if fmt == "json":
        payload = {
            "mode": cmp.reports[0].mode,
            "columns": cols,
            "rows": [
                {"run": label, **{c: values[c] for c in cols}}
                for label, values, _ in rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["run"] + cols)
        for label, values, signed in rows:
            writer.writerow([label] + [_fmt(values[c], signed) for c in cols])
        return buf.getvalue()

    if fmt == "text":
        header = ["run"] + cols
        body = [
            [label] + [_fmt(values[c], signed) or "-" for c in cols]
            for label, values, signed in rows
        ]
        widths = [
            max(len(header[j]), max(len(r[j]) for r in body))
            for j in range(len(header))
        ]
        lines = [
            "  ".join(h.ljust(widths[j]) for j, h in enumerate(header)).rstrip(),
            "  ".join("-" * widths[j] for j in range(len(header))),
        ]
        for r in body:
            lines.append("  ".join(r[j].ljust(widths[j]) for j in range(len(r))).rstrip())
        return "\n".join(lines) + "\n"

    raise ParameterError(f"unknown comparison format {fmt!r}")
