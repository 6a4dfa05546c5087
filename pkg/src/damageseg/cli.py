"""Command-line entry point.

Subcommands cover the whole procedure: edge extraction and tri-label
composition, tiling, class weights, train/test split, random-crop
augmentation, synthetic generation and merge, evaluation, overlays,
and comparison reports.

Every subcommand is deterministic given identical inputs, flags, and
seed (PNG encoder settings are pinned, manifests carry relative paths
and no timestamps), and no subcommand mutates its inputs: commands
that evolve a manifest write a new one via -o.
"""

import argparse
import dataclasses
import os
import sys
from concurrent import futures
from pathlib import Path

import numpy as np

from . import edges as edges_mod
from . import genbridge, pipeline
from ._kernels import resize_nearest_u8
from .edges import EdgeMap
from .errors import DamagesegError, ParameterError
from .labels import (
    ROI,
    LabelDecodeError,
    RoiMask,
    TriLabel,
    compose_trilabel,
    decode_label_png,
    encode_label_png,
    roi_from_label_file,
)
from .manifest import DatasetManifest
from .metrics import MetricsReport, evaluate_run
from .raster import Raster, to_grayscale
from .report import RunComparison, render_comparison, render_overlay

JOBS_ENV = "DAMAGESEG_JOBS"


def _resolve_jobs(value):
    if value is not None:
        return value
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ParameterError(f"{JOBS_ENV} must be an integer, got {env!r}")
        if n < 1:
            raise ParameterError(f"{JOBS_ENV} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _pmap(fn, items, jobs):
    """Map over work items, in order, optionally on a thread pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _label_plane(path):
    """Load a label PNG as a {0,1,2} plane.

    Accepts tri-labels as written by `compose` and plain 0/255 roi
    masks (which become {0,2} planes with an empty edge class).
    """
    try:
        return decode_label_png(path).classes
    except LabelDecodeError:
        return np.where(RoiMask.from_png(path).mask, ROI, 0).astype(np.uint8)


def _photo_label_pairs(photos_dir, labels_dir):
    photos = sorted(Path(photos_dir).glob("*.png"))
    if not photos:
        raise ParameterError(f"no PNG photos in {photos_dir}")
    missing = [p.name for p in photos if not (Path(labels_dir) / p.name).is_file()]
    if missing:
        raise ParameterError(
            f"no label in {labels_dir} for: " + ", ".join(missing)
        )
    return [(p, Path(labels_dir) / p.name) for p in photos]


def _rebase(manifest, old_base, new_base):
    """Rewrite record paths when a manifest moves to another directory."""
    old_base = Path(old_base).resolve()
    new_base = Path(new_base).resolve()
    if old_base == new_base:
        return manifest
    records = tuple(
        dataclasses.replace(
            r,
            image_path=os.path.relpath(old_base / r.image_path, new_base),
            label_path=os.path.relpath(old_base / r.label_path, new_base),
        )
        for r in manifest.records
    )
    return manifest.replace(records=records)


def _write_tiles(tiles, plane, root):
    for t in tiles:
        t.image.to_png(root / t.record.image_path)
        label_crop = pipeline.crop_like(t.record, plane, nearest=True)
        encode_label_png(TriLabel(label_crop), root / t.record.label_path)


def _out(path):
    """Output paths get their parent directory for free."""
    parent = Path(path).resolve().parent
    parent.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_edges(args):
    img = to_grayscale(Raster.from_png(args.input))
    method = edges_mod.method_from_options(
        args.method,
        threshold=args.threshold,
        sigma=args.sigma,
        low=args.low,
        high=args.high,
        zc_slope=args.zc_slope,
    )
    edge_map = edges_mod.detect_edges(img, method)
    if args.dilate:
        edge_map = edges_mod.dilate(edge_map, args.dilate)
    edge_map.to_png(_out(args.output))
    print(f"{edge_map.count()} edge pixels -> {args.output}")


def _cmd_compose(args):
    roi = RoiMask.from_png(args.roi)
    edge = EdgeMap.from_png(args.edge)
    label = compose_trilabel(roi, edge)
    encode_label_png(label, _out(args.output))
    counts = label.class_counts()
    print(f"background/edge/roi = {counts[0]}/{counts[1]}/{counts[2]} -> {args.output}")


def _cmd_tile(args):
    jobs = _resolve_jobs(args.jobs)
    out = Path(args.output)
    root = out.parent
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "labels").mkdir(parents=True, exist_ok=True)

    def work(pair):
        photo_path, label_path = pair
        photo = Raster.from_png(photo_path)
        plane = _label_plane(label_path)
        roi = RoiMask(plane == ROI)
        tiles = pipeline.tile(
            photo, roi, args.tile_size, args.min_keep, photo_id=photo_path.stem
        )
        _write_tiles(tiles, plane, root)
        return [t.record for t in tiles]

    pairs = _photo_label_pairs(args.photos, args.labels)
    records = [r for recs in _pmap(work, pairs, jobs) for r in recs]
    if not records:
        raise ParameterError("no tiles kept: no cell met the size and roi rules")
    manifest = DatasetManifest(
        records=tuple(records), tile_size=args.tile_size, min_keep=args.min_keep
    )
    manifest.save(out)
    print(f"{len(records)} tiles from {len(pairs)} photos -> {out}")


def _cmd_weights(args):
    jobs = _resolve_jobs(args.jobs)
    manifest = DatasetManifest.load(args.manifest)
    base = Path(args.manifest).parent
    real = manifest.real_records()
    if not real:
        raise ParameterError("manifest has no real records to weigh")
    rois = _pmap(lambda r: roi_from_label_file(r.label_file(base)), real, jobs)
    weights = pipeline.class_weights(rois)
    out = Path(args.output)
    rebased = _rebase(manifest, base, out.parent)
    rebased.replace(class_weights=weights.as_dict()).save(_out(out))
    for cls in pipeline.WEIGHT_CLASSES:
        print(f"{cls}: weight {weights[cls]:.4f} ({weights.pixel_counts[cls]} px)")
    print(f"-> {out}")


def _cmd_split(args):
    manifest = DatasetManifest.load(args.manifest)
    out = Path(args.output)
    rebased = _rebase(manifest, Path(args.manifest).parent, out.parent)
    result = pipeline.partition(
        rebased, train_fraction=args.fraction, seed=args.seed, grouped=args.grouped
    )
    result.save(_out(out))
    counts = result.split_counts()
    print(f"train {counts['train']} / test {counts['test']} -> {out}")


def _cmd_crops(args):
    jobs = _resolve_jobs(args.jobs)
    out = Path(args.output)
    root = out.parent
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "labels").mkdir(parents=True, exist_ok=True)

    def work(pair):
        photo_path, label_path = pair
        photo = Raster.from_png(photo_path)
        plane = _label_plane(label_path)
        roi = RoiMask(plane == ROI)
        crop = args.crop_size
        # mirror the upscale random_crops applies, so the stored label
        # plane shares the crop records' coordinate frame
        w, h = max(photo.width, crop), max(photo.height, crop)
        if (w, h) != (photo.width, photo.height):
            plane = resize_nearest_u8(np.ascontiguousarray(plane), h, w)
        tiles = pipeline.random_crops(
            photo,
            roi,
            count=args.count,
            crop=crop,
            seed=genbridge.tile_seed(args.seed, photo_path.stem),
            photo_id=photo_path.stem,
        )
        _write_tiles(tiles, plane, root)
        return [t.record for t in tiles]

    pairs = _photo_label_pairs(args.photos, args.labels)
    records = [r for recs in _pmap(work, pairs, jobs) for r in recs]
    manifest = DatasetManifest(
        records=tuple(records), rng_seed=args.seed, tile_size=args.crop_size
    )
    manifest.save(out)
    print(f"{len(records)} crops from {len(pairs)} photos -> {out}")


def _cmd_gen(args):
    jobs = _resolve_jobs(args.jobs)
    manifest = DatasetManifest.load(args.manifest)
    base = Path(args.manifest).parent
    train = [
        r for r in manifest.records
        if r.split == "train" and r.provenance == "real"
    ]
    if not train:
        raise ParameterError("manifest has no real train records to generate from")
    labels = _pmap(
        lambda r: (r.tile_id, decode_label_png(r.label_file(base))), train, jobs
    )
    spec = genbridge.GeneratorSpec(
        generator_id=args.id or args.generator,
        kind=args.generator,
        command=args.cmd,
        seed=args.seed,
        noise_amplitude=args.noise_amplitude,
    )
    batch = genbridge.run_generator(labels, spec, args.workdir)
    batch.save(_out(args.output), base=args.workdir)
    print(f"{len(batch)} tiles generated -> {args.output}")


def _cmd_merge(args):
    manifest = DatasetManifest.load(args.manifest)
    batch = genbridge.SyntheticBatch.load(args.batch)
    batch_dir = Path(args.batch).parent.resolve()
    out = Path(args.output)
    new_base = out.parent.resolve()
    rebased = _rebase(manifest, Path(args.manifest).parent, new_base)
    image_paths = {
        it.tile_id: os.path.relpath(batch_dir / it.image_path, new_base)
        for it in batch.items
    }
    before = rebased.split_counts()
    merged = genbridge.merge_synthetic(rebased, batch, image_paths)
    merged.save(_out(out))
    after = merged.split_counts()
    print(
        f"train {before['train']} -> {after['train']}, "
        f"test {after['test']} (unchanged) -> {out}"
    )


def _cmd_evaluate(args):
    jobs = _resolve_jobs(args.jobs)
    gt_dir = Path(args.gt)
    pred_dir = Path(args.pred)
    names = sorted(p.name for p in gt_dir.glob("*.png"))
    if not names:
        raise ParameterError(f"no PNG masks in {gt_dir}")
    missing = [n for n in names if not (pred_dir / n).is_file()]
    if missing:
        raise ParameterError(f"no prediction in {pred_dir} for: " + ", ".join(missing))

    def work(name):
        return roi_from_label_file(gt_dir / name), roi_from_label_file(pred_dir / name)

    pairs = _pmap(work, names, jobs)
    rep = evaluate_run(pairs, mode=args.mode, bf_tolerance=args.bf_tolerance)
    if args.output:
        Path(_out(args.output)).write_text(rep.to_json(), encoding="utf-8")
        label = pred_dir.name or "run"
        sys.stdout.write(render_comparison(RunComparison((label,), (rep,)), "text"))
        print(f"-> {args.output}")
    else:
        sys.stdout.write(rep.to_json())


def _cmd_overlay(args):
    photo = Raster.from_png(args.photo)
    gt = roi_from_label_file(args.gt)
    pred = roi_from_label_file(args.pred)
    render_overlay(photo, gt, pred).to_png(_out(args.output))
    print(f"-> {args.output}")


def _cmd_report(args):
    reports = [
        MetricsReport.from_json(Path(p).read_text(encoding="utf-8"))
        for p in args.reports
    ]
    if args.labels:
        labels = [s.strip() for s in args.labels.split(",")]
        if len(labels) != len(reports):
            raise ParameterError(
                f"{len(labels)} labels for {len(reports)} reports"
            )
    else:
        labels = [Path(p).stem for p in args.reports]
    text = render_comparison(RunComparison(labels, reports), args.format)
    if args.output:
        Path(_out(args.output)).write_text(text, encoding="utf-8")
        print(f"-> {args.output}")
    else:
        sys.stdout.write(text)


def _nonneg_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def _positive_int(text):
    n = _nonneg_int(text)
    if n == 0:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _add_jobs(sp):
    sp.add_argument(
        "-j", "--jobs", type=_positive_int, default=None,
        help=f"parallel workers (default: ${JOBS_ENV} or CPU count)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="damageseg",
        description="Damage-region dataset construction, synthetic "
        "augmentation bridging, and segmentation evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("edges", help="detect structure edges in a photo")
    sp.add_argument("input", help="photo PNG")
    sp.add_argument("output", help="edge PNG (0/255)")
    sp.add_argument("--method", choices=edges_mod.VARIANTS, default="sobel")
    sp.add_argument("--threshold", type=float, default=None,
                    help="gradient threshold as a fraction of the peak")
    sp.add_argument("--sigma", type=float, default=None,
                    help="Gaussian sigma (log/zerocross/canny)")
    sp.add_argument("--low", type=float, default=None, help="canny low fraction")
    sp.add_argument("--high", type=float, default=None, help="canny high fraction")
    sp.add_argument("--zc-slope", type=float, default=None,
                    help="zero-crossing slope threshold (default: mean |response|)")
    sp.add_argument("--dilate", type=_nonneg_int, default=0,
                    help="dilate edges by this radius")
    sp.set_defaults(func=_cmd_edges)

    sp = sub.add_parser("compose", help="compose roi + edges into a tri-label")
    sp.add_argument("roi", help="binary roi mask PNG")
    sp.add_argument("edge", help="binary edge PNG")
    sp.add_argument("output", help="tri-label PNG (values 0/1/2)")
    sp.set_defaults(func=_cmd_compose)

    sp = sub.add_parser("tile", help="cut photos into stored tiles + manifest")
    sp.add_argument("--photos", required=True, help="directory of photo PNGs")
    sp.add_argument("--labels", required=True,
                    help="directory of name-matched tri-label or roi-mask PNGs")
    sp.add_argument("-o", "--output", required=True, help="manifest path to write")
    sp.add_argument("--tile-size", type=_positive_int, default=pipeline.TILE_SIZE)
    sp.add_argument("--min-keep", type=_positive_int, default=pipeline.MIN_KEEP)
    _add_jobs(sp)
    sp.set_defaults(func=_cmd_tile)

    sp = sub.add_parser("weights", help="compute median-frequency class weights")
    sp.add_argument("manifest")
    sp.add_argument("-o", "--output", required=True, help="manifest path to write")
    _add_jobs(sp)
    sp.set_defaults(func=_cmd_weights)

    sp = sub.add_parser("split", help="assign train/test splits")
    sp.add_argument("manifest")
    sp.add_argument("-o", "--output", required=True, help="manifest path to write")
    sp.add_argument("--fraction", type=float, default=pipeline.TRAIN_FRACTION)
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    sp.add_argument("--grouped", action=argparse.BooleanOptionalAction, default=True,
                    help="keep all tiles of a photo in one split")
    sp.set_defaults(func=_cmd_split)

    sp = sub.add_parser("crops", help="random-crop augmentation from photos")
    sp.add_argument("--photos", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("-o", "--output", required=True, help="manifest path to write")
    sp.add_argument("--count", type=_positive_int, default=pipeline.CROP_COUNT)
    sp.add_argument("--crop-size", type=_positive_int, default=pipeline.TILE_SIZE)
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    _add_jobs(sp)
    sp.set_defaults(func=_cmd_crops)

    sp = sub.add_parser("gen", help="run a generator over the train labels")
    sp.add_argument("manifest")
    sp.add_argument("--workdir", required=True, help="protocol directory")
    sp.add_argument("-o", "--output", required=True, help="batch JSON to write")
    sp.add_argument("--generator", choices=("reference", "external"),
                    default="reference")
    sp.add_argument("--cmd", default=None,
                    help="external command template with {in} and {out}")
    sp.add_argument("--id", default=None,
                    help="generator id recorded in the batch (default: the kind)")
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    sp.add_argument("--noise-amplitude", type=_nonneg_int,
                    default=genbridge.NOISE_AMPLITUDE)
    _add_jobs(sp)
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("merge", help="merge a synthetic batch into a manifest")
    sp.add_argument("manifest")
    sp.add_argument("batch", help="batch JSON written by gen")
    sp.add_argument("-o", "--output", required=True, help="manifest path to write")
    sp.set_defaults(func=_cmd_merge)

    sp = sub.add_parser("evaluate", help="score predicted masks against ground truth")
    sp.add_argument("gt", help="directory of ground-truth masks")
    sp.add_argument("pred", help="directory of name-matched predicted masks")
    sp.add_argument("--mode", choices=("global", "per-image-mean"),
                    default="per-image-mean")
    sp.add_argument("--bf-tolerance", type=float, default=None,
                    help="boundary match tolerance in px (default: 0.75%% of diagonal)")
    sp.add_argument("-o", "--output", default=None, help="metrics JSON to write")
    _add_jobs(sp)
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("overlay", help="render a gt/pred overlay image")
    sp.add_argument("photo")
    sp.add_argument("gt")
    sp.add_argument("pred")
    sp.add_argument("-o", "--output", required=True, help="overlay PNG to write")
    sp.set_defaults(func=_cmd_overlay)

    sp = sub.add_parser("report", help="compare metrics reports in a table")
    sp.add_argument("reports", nargs="+", help="metrics JSON files")
    sp.add_argument("--labels", default=None, help="comma-separated run labels")
    sp.add_argument("--format", choices=("text", "csv", "json"), default="text")
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=_cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DamagesegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
