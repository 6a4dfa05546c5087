"""Dataset manifest: a JSON-lines catalog with one record per tile.

The file starts with a single header object (seed, creation parameters,
class weights) followed by one TileRecord object per line. All paths
inside a manifest are relative to the manifest's own directory, so a
dataset tree can be moved or archived wholesale.
"""

import dataclasses
import json
from pathlib import Path

from .errors import ManifestError
from .raster import round_half_up

MANIFEST_KIND = "damageseg-manifest"
MANIFEST_VERSION = 1

SPLITS = ("train", "test")
PROVENANCES = ("real", "synthetic")


@dataclasses.dataclass(frozen=True)
class TileRecord:
    """One stored tile: where it came from and where its files live."""

    tile_id: str
    source_photo_id: str
    offset_x: int
    offset_y: int
    native_w: int
    native_h: int
    stored_size: int
    split: str
    provenance: str
    image_path: str
    label_path: str
    generator_id: str = None

    def __post_init__(self):
        if not self.tile_id:
            raise ManifestError("tile_id must be non-empty")
        if self.split not in SPLITS:
            raise ManifestError(f"{self.tile_id}: unknown split {self.split!r}")
        if self.provenance not in PROVENANCES:
            raise ManifestError(
                f"{self.tile_id}: unknown provenance {self.provenance!r}"
            )
        if self.provenance == "synthetic" and not self.generator_id:
            raise ManifestError(
                f"{self.tile_id}: synthetic records must carry a generator_id"
            )
        if self.offset_x < 0 or self.offset_y < 0:
            raise ManifestError(f"{self.tile_id}: negative tile offset")
        if self.native_w < 1 or self.native_h < 1 or self.stored_size < 1:
            raise ManifestError(f"{self.tile_id}: non-positive tile dimensions")

    def image_file(self, base):
        return Path(base) / self.image_path

    def label_file(self, base):
        return Path(base) / self.label_path

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, payload):
        try:
            return cls(**payload)
        except TypeError as exc:
            raise ManifestError(f"bad tile record: {exc}") from exc


@dataclasses.dataclass(frozen=True)
class DatasetManifest:
    """Record catalog plus the parameters that produced it."""

    records: tuple
    rng_seed: int = None
    tile_size: int = None
    min_keep: int = None
    train_fraction: float = None
    grouped: bool = None
    class_weights: dict = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.class_weights is not None:
            object.__setattr__(self, "class_weights", dict(self.class_weights))
        self.validate()

    def validate(self):
        seen = set()
        for rec in self.records:
            if not isinstance(rec, TileRecord):
                raise ManifestError(f"not a tile record: {rec!r}")
            if rec.tile_id in seen:
                raise ManifestError(f"duplicate tile_id {rec.tile_id!r}")
            seen.add(rec.tile_id)
            if rec.provenance == "synthetic" and rec.split != "train":
                raise ManifestError(
                    f"{rec.tile_id}: synthetic records must stay in the train split"
                )
        if self.class_weights is not None:
            for cls, w in self.class_weights.items():
                if not w > 0:
                    raise ManifestError(f"class weight {cls} = {w} is not positive")
        # The rounding rule pins exact counts only for per-tile splits;
        # photo-grouped splits may overshoot by part of one group.
        if self.train_fraction is not None and self.grouped is False:
            real = [r for r in self.records if r.provenance == "real"]
            expected = int(round_half_up(len(real) * self.train_fraction))
            actual = sum(1 for r in real if r.split == "train")
            if actual != expected:
                raise ManifestError(
                    f"train split has {actual} real records, expected {expected} "
                    f"for fraction {self.train_fraction}"
                )

    def __len__(self):
        return len(self.records)

    def split_records(self, split):
        return [r for r in self.records if r.split == split]

    def real_records(self):
        return [r for r in self.records if r.provenance == "real"]

    def split_counts(self):
        return {s: sum(1 for r in self.records if r.split == s) for s in SPLITS}

    def record(self, tile_id):
        for rec in self.records:
            if rec.tile_id == tile_id:
                return rec
        raise ManifestError(f"no record with tile_id {tile_id!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def header_dict(self):
        return {
            "kind": MANIFEST_KIND,
            "version": MANIFEST_VERSION,
            "rng_seed": self.rng_seed,
            "tile_size": self.tile_size,
            "min_keep": self.min_keep,
            "train_fraction": self.train_fraction,
            "grouped": self.grouped,
            "class_weights": self.class_weights,
        }

    def save(self, path):
        path = Path(path)
        lines = [json.dumps(self.header_dict(), sort_keys=True)]
        lines.extend(json.dumps(r.to_dict(), sort_keys=True) for r in self.records)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ManifestError(f"{path}: empty manifest")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:1: bad JSON: {exc}") from exc
        if not isinstance(header, dict) or header.get("kind") != MANIFEST_KIND:
            raise ManifestError(f"{path}: missing {MANIFEST_KIND} header line")
        if header.get("version") != MANIFEST_VERSION:
            raise ManifestError(
                f"{path}: unsupported manifest version {header.get('version')!r}"
            )
        records = []
        for n, line in enumerate(lines[1:], start=2):
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{n}: bad JSON: {exc}") from exc
            records.append(TileRecord.from_dict(payload))
        return cls(
            records=tuple(records),
            rng_seed=header.get("rng_seed"),
            tile_size=header.get("tile_size"),
            min_keep=header.get("min_keep"),
            train_fraction=header.get("train_fraction"),
            grouped=header.get("grouped"),
            class_weights=header.get("class_weights"),
        )
