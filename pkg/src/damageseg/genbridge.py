"""Generator adapter: the process boundary through which any
label-to-image generator produces synthetic tiles.

Protocol: the bridge writes tri-label PNGs (raw {0,1,2} values) to
<workdir>/in/<tile_id>.png, the generator fills <workdir>/out/ with one
same-named, same-sized RGB PNG per input, and the bridge validates and
catalogs the result. A deterministic built-in reference generator
exists so the pipeline is testable without any learned model; external
generators are one subprocess invocation of a command template with
{in} and {out} placeholders.
"""

import dataclasses
import hashlib
import json
import os
import shlex
import subprocess
from pathlib import Path

import numpy as np

from .errors import GeneratorError
from .labels import TriLabel, encode_label_png
from .manifest import DatasetManifest
from .raster import Raster

BATCH_KIND = "damageseg-batch"
BATCH_VERSION = 1

NOISE_AMPLITUDE = 10

# class value -> fill color: background, edge, damage roi
REFERENCE_PALETTE = np.array(
    [[96, 96, 96], [200, 200, 200], [150, 75, 40]], dtype=np.uint8
)


@dataclasses.dataclass(frozen=True)
class GeneratorSpec:
    """How to produce images from tri-labels."""

    generator_id: str
    kind: str = "reference"
    command: str = None
    seed: int = 0
    noise_amplitude: int = NOISE_AMPLITUDE

    def __post_init__(self):
        if not self.generator_id:
            raise GeneratorError("generator_id must be non-empty")
        if self.kind not in ("reference", "external"):
            raise GeneratorError(f"unknown generator kind {self.kind!r}")
        if self.kind == "external":
            if not self.command:
                raise GeneratorError("external generator needs a command template")
            if "{in}" not in self.command or "{out}" not in self.command:
                raise GeneratorError(
                    "command template must contain {in} and {out} placeholders"
                )


@dataclasses.dataclass(frozen=True)
class BatchItem:
    tile_id: str
    label_path: str
    image_path: str
    generator_id: str


@dataclasses.dataclass(frozen=True)
class SyntheticBatch:
    """Catalog of generated tiles; item paths are relative to a base dir
    (the generator workdir, or the batch file's directory once saved)."""

    generator_id: str
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self):
        return len(self.items)

    def save(self, path, base):
        """Write the batch as JSON; paths rewritten relative to the file."""
        path = Path(path)
        base = Path(base)
        items = [
            {
                "tile_id": it.tile_id,
                "label_path": os.path.relpath(base / it.label_path, path.parent),
                "image_path": os.path.relpath(base / it.image_path, path.parent),
                "generator_id": it.generator_id,
            }
            for it in self.items
        ]
        payload = {
            "kind": BATCH_KIND,
            "version": BATCH_VERSION,
            "generator_id": self.generator_id,
            "items": items,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise GeneratorError(f"cannot read batch {path}: {exc}") from exc
        if payload.get("kind") != BATCH_KIND or payload.get("version") != BATCH_VERSION:
            raise GeneratorError(f"{path}: not a {BATCH_KIND} v{BATCH_VERSION} file")
        items = tuple(
            BatchItem(
                tile_id=it["tile_id"],
                label_path=it["label_path"],
                image_path=it["image_path"],
                generator_id=it["generator_id"],
            )
            for it in payload["items"]
        )
        return cls(generator_id=payload["generator_id"], items=items)


def tile_seed(seed, tile_id):
    """Independent per-tile RNG seed material, stable across runs."""
    digest = hashlib.sha256(tile_id.encode("utf-8")).digest()
    return [int(seed), int.from_bytes(digest[:8], "big")]


def reference_generate(label: TriLabel, seed, noise_amplitude=NOISE_AMPLITUDE) -> Raster:
    """Deterministic stand-in generator: class-color fill plus seeded
    uniform noise of amplitude +/-noise_amplitude, clamped to 8 bits."""
    if noise_amplitude < 0:
        raise GeneratorError(f"noise amplitude must be >= 0, got {noise_amplitude}")
    base = REFERENCE_PALETTE[label.classes]
    if noise_amplitude == 0:
        return Raster(base)
    rng = np.random.default_rng(seed)
    noise = rng.integers(
        -noise_amplitude, noise_amplitude + 1, size=base.shape, dtype=np.int64
    )
    out = np.clip(base.astype(np.int64) + noise, 0, 255).astype(np.uint8)
    return Raster(out)


def _run_external(spec, in_dir, out_dir):
    tokens = shlex.split(spec.command)
    argv = [
        t.replace("{in}", str(in_dir)).replace("{out}", str(out_dir)) for t in tokens
    ]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise GeneratorError(f"cannot invoke generator {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-20:]
        raise GeneratorError(
            f"generator exited with status {proc.returncode}:\n" + "\n".join(tail)
        )


def run_generator(labels, spec: GeneratorSpec, workdir) -> SyntheticBatch:
    """Drive one generator invocation over a set of tri-label tiles.

    `labels` is a list of (tile_id, TriLabel) pairs. Returns a batch
    whose item paths are relative to `workdir`. With zero labels the
    generator is not invoked at all.
    """
    labels = list(labels)
    if not labels:
        return SyntheticBatch(generator_id=spec.generator_id, items=())
    ids = [tile_id for tile_id, _ in labels]
    if len(set(ids)) != len(ids):
        raise GeneratorError("duplicate tile_ids in generator input")

    workdir = Path(workdir)
    in_dir = workdir / "in"
    out_dir = workdir / "out"
    in_dir.mkdir(parents=True, exist_ok=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    for tile_id, label in labels:
        encode_label_png(label, in_dir / f"{tile_id}.png")
        # stale outputs must not satisfy validation
        stale = out_dir / f"{tile_id}.png"
        if stale.exists():
            stale.unlink()

    if spec.kind == "reference":
        for tile_id, label in labels:
            img = reference_generate(
                label, tile_seed(spec.seed, tile_id), spec.noise_amplitude
            )
            img.to_png(out_dir / f"{tile_id}.png")
    else:
        _run_external(spec, in_dir, out_dir)

    missing = [t for t, _ in labels if not (out_dir / f"{t}.png").is_file()]
    if missing:
        raise GeneratorError(
            "generator produced no output for: " + ", ".join(sorted(missing))
        )
    problems = []
    for tile_id, label in labels:
        img = Raster.from_png(out_dir / f"{tile_id}.png")
        if img.channels != 3:
            problems.append(f"{tile_id}: output is not RGB")
        elif (img.height, img.width) != (label.height, label.width):
            problems.append(
                f"{tile_id}: output is {img.width}x{img.height}, "
                f"label is {label.width}x{label.height}"
            )
    if problems:
        raise GeneratorError("bad generator outputs:\n" + "\n".join(problems))

    items = tuple(
        BatchItem(
            tile_id=tile_id,
            label_path=str(Path("in") / f"{tile_id}.png"),
            image_path=str(Path("out") / f"{tile_id}.png"),
            generator_id=spec.generator_id,
        )
        for tile_id, _ in labels
    )
    return SyntheticBatch(generator_id=spec.generator_id, items=items)


def merge_synthetic(manifest: DatasetManifest, batch: SyntheticBatch,
                    image_paths=None) -> DatasetManifest:
    """Add one synthetic train record per batch item.

    Labels are reused from the source tile (generation conditions on
    them; only images are synthetic). Batch items must reference
    training records: synthetic data never touches the test split.
    `image_paths` optionally maps tile_id to the manifest-relative image
    path to record (defaults to each item's own image_path).
    """
    if not batch.items:
        return manifest
    new_records = list(manifest.records)
    for item in batch.items:
        source = manifest.record(item.tile_id)
        if source.split != "train":
            raise GeneratorError(
                f"batch references {item.tile_id!r} which is in the "
                f"{source.split} split; synthetic data must stay in train"
            )
        if source.provenance != "real":
            raise GeneratorError(
                f"batch references synthetic record {item.tile_id!r}; "
                "generators run on real tiles only"
            )
        image_path = item.image_path
        if image_paths is not None:
            image_path = image_paths[item.tile_id]
        new_records.append(
            dataclasses.replace(
                source,
                tile_id=f"{source.tile_id}__{item.generator_id}",
                split="train",
                provenance="synthetic",
                generator_id=item.generator_id,
                image_path=image_path,
                label_path=source.label_path,
            )
        )
    return manifest.replace(records=tuple(new_records))
