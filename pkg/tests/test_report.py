import csv
import io
import json

import numpy as np
import pytest

from damageseg.errors import ParameterError
from damageseg.labels import RoiMask
from damageseg.metrics import MetricsReport
from damageseg.raster import Raster
from damageseg.report import RunComparison, render_comparison, render_overlay


def _report(roi_iou, bg_iou=0.98, mode="per-image-mean", **extra):
    per_class = {
        "roi": {"iou": roi_iou, "precision": 0.5, "recall": 0.6, "bf": 0.4},
        "background": {"iou": bg_iou, "precision": 0.99, "recall": 0.99, "bf": 0.9},
    }
    for cls, metrics in extra.items():
        per_class[cls].update(metrics)
    return MetricsReport(mode=mode, image_count=4, per_class=per_class)


# --- overlay ----------------------------------------------------------------

def test_overlay_color_semantics():
    photo = Raster(np.full((2, 4, 3), 100, dtype=np.uint8))
    gt = RoiMask(np.array([[1, 1, 0, 0]] * 2, dtype=bool))
    pred = RoiMask(np.array([[0, 1, 1, 0]] * 2, dtype=bool))
    out = render_overlay(photo, gt, pred).pixels
    # dimmed base: 100 * 0.6 = 60; tinted: 0.5*60 + 0.5*tint
    assert out[0, 0].tolist() == [30, 158, 30]    # gt only: green
    assert out[0, 1].tolist() == [158, 158, 30]   # both: yellow
    assert out[0, 2].tolist() == [158, 30, 30]    # pred only: red
    assert out[0, 3].tolist() == [60, 60, 60]     # agree-background: dim only


def test_overlay_promotes_grayscale():
    photo = Raster(np.full((3, 3), 200, dtype=np.uint8))
    empty = RoiMask(np.zeros((3, 3), dtype=bool))
    out = render_overlay(photo, empty, empty)
    assert out.pixels.shape == (3, 3, 3)
    assert np.all(out.pixels == 120)


def test_overlay_shape_checks():
    photo = Raster(np.zeros((3, 3, 3), dtype=np.uint8))
    with pytest.raises(Exception):
        render_overlay(photo, RoiMask(np.zeros((2, 2), dtype=bool)),
                       RoiMask(np.zeros((2, 2), dtype=bool)))


# --- comparison --------------------------------------------------------------

def test_delta_row_second_minus_first():
    cmp = RunComparison(
        labels=("initial", "augmented"),
        reports=(_report(0.2778), _report(0.4851)),
    )
    delta = cmp.delta_row()
    assert delta["roi_iou"] == pytest.approx(0.2073, abs=1e-12)
    text = render_comparison(cmp, fmt="text")
    assert "+0.2073" in text


def test_single_run_has_no_delta():
    cmp = RunComparison(labels=("only",), reports=(_report(0.3),))
    assert cmp.delta_row() is None
    assert "delta" not in render_comparison(cmp, fmt="text")


def test_three_runs_have_no_delta():
    cmp = RunComparison(
        labels=("a", "b", "c"),
        reports=(_report(0.1), _report(0.2), _report(0.3)),
    )
    assert cmp.delta_row() is None


def test_csv_round_trips_within_tolerance():
    cmp = RunComparison(
        labels=("initial", "augmented"),
        reports=(_report(0.27781234), _report(0.48514321)),
    )
    text = render_comparison(cmp, fmt="csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["run"] for r in rows] == ["initial", "augmented", "delta"]
    assert float(rows[0]["roi_iou"]) == pytest.approx(0.27781234, abs=5e-5)
    assert float(rows[1]["mean_iou"]) == pytest.approx(
        (0.48514321 + 0.98) / 2, abs=5e-5
    )


def test_json_format_is_machine_readable():
    cmp = RunComparison(labels=("a",), reports=(_report(0.5),))
    payload = json.loads(render_comparison(cmp, fmt="json"))
    assert payload["mode"] == "per-image-mean"
    assert payload["rows"][0]["run"] == "a"
    assert payload["rows"][0]["roi_iou"] == 0.5


def test_wall_clock_column_optional():
    without = RunComparison(labels=("a",), reports=(_report(0.5),))
    assert "wall_clock_s" not in without.columns()
    with_clock = RunComparison(
        labels=("a",), reports=(_report(0.5),), wall_clock=(12.5,)
    )
    assert "wall_clock_s" in with_clock.columns()
    assert "12.5" in render_comparison(with_clock, fmt="text")


def test_none_metrics_render_as_dash():
    report = MetricsReport(
        mode="global", image_count=1,
        per_class={"roi": {"iou": None}, "background": {"iou": 1.0}},
    )
    cmp = RunComparison(labels=("r",), reports=(report,))
    assert "-" in render_comparison(cmp, fmt="text")


def test_comparison_validation():
    with pytest.raises(ParameterError):
        RunComparison(labels=("a", "a"), reports=(_report(0.1), _report(0.2)))
    with pytest.raises(ParameterError):
        RunComparison(labels=("a",), reports=())
    with pytest.raises(ParameterError):
        RunComparison(
            labels=("a", "b"),
            reports=(_report(0.1), _report(0.2, mode="global")),
        )
