import json

import pytest

from damageseg.errors import ManifestError
from damageseg.manifest import MANIFEST_KIND, DatasetManifest, TileRecord


def make_record(tile_id="p1_x0_y0", **overrides):
    fields = dict(
        tile_id=tile_id,
        source_photo_id="p1",
        offset_x=0,
        offset_y=0,
        native_w=224,
        native_h=224,
        stored_size=224,
        split="train",
        provenance="real",
        image_path=f"images/{tile_id}.png",
        label_path=f"labels/{tile_id}.png",
    )
    fields.update(overrides)
    return TileRecord(**fields)


def test_record_validation():
    with pytest.raises(ManifestError):
        make_record(split="val")
    with pytest.raises(ManifestError):
        make_record(provenance="augmented")
    with pytest.raises(ManifestError):
        make_record(offset_x=-1)
    with pytest.raises(ManifestError):
        make_record(native_w=0)
    with pytest.raises(ManifestError):
        make_record(tile_id="")
    # synthetic records must say which generator made them
    with pytest.raises(ManifestError):
        make_record(provenance="synthetic")
    make_record(provenance="synthetic", generator_id="ref")


def test_record_file_paths(tmp_path):
    rec = make_record()
    assert rec.image_file(tmp_path) == tmp_path / "images" / "p1_x0_y0.png"
    assert rec.label_file(tmp_path) == tmp_path / "labels" / "p1_x0_y0.png"


def test_manifest_rejects_duplicate_ids():
    with pytest.raises(ManifestError):
        DatasetManifest(records=[make_record(), make_record()])


def test_manifest_rejects_synthetic_outside_train():
    rec = make_record(
        tile_id="p1_x0_y0__ref",
        provenance="synthetic",
        generator_id="ref",
        split="test",
    )
    with pytest.raises(ManifestError):
        DatasetManifest(records=[rec])


def test_manifest_split_count_enforced_for_per_tile_splits():
    records = [make_record(tile_id=f"p{i}_x0_y0", source_photo_id=f"p{i}",
                           split="train" if i < 9 else "test")
               for i in range(10)]
    # 10 * 0.95 rounds half up to 10, not 9
    with pytest.raises(ManifestError):
        DatasetManifest(records=records, train_fraction=0.95, grouped=False)
    # grouped splits may deviate from the exact count
    DatasetManifest(records=records, train_fraction=0.95, grouped=True)
    records[9] = make_record(tile_id="p9_x0_y0", source_photo_id="p9", split="train")
    DatasetManifest(records=records, train_fraction=0.95, grouped=False)


def test_manifest_rejects_nonpositive_weights():
    with pytest.raises(ManifestError):
        DatasetManifest(records=[make_record()],
                        class_weights={"roi": 0.0, "background": 1.0})


def test_manifest_lookup_and_counts():
    records = [make_record(tile_id=f"p1_x{i}_y0", offset_x=i * 224) for i in range(3)]
    records.append(make_record(tile_id="p2_x0_y0", source_photo_id="p2", split="test"))
    records.append(make_record(tile_id="p1_x0_y0__ref", provenance="synthetic",
                               generator_id="ref"))
    m = DatasetManifest(records=records)
    assert len(m) == 5
    assert m.split_counts() == {"train": 4, "test": 1}
    assert len(m.split_records("test")) == 1
    assert len(m.real_records()) == 4
    assert m.record("p2_x0_y0").split == "test"
    with pytest.raises(ManifestError):
        m.record("missing")


def test_save_load_round_trip(tmp_path):
    records = [make_record(tile_id=f"p1_x{i}_y0", offset_x=i * 224) for i in range(4)]
    m = DatasetManifest(
        records=records,
        rng_seed=7,
        tile_size=224,
        min_keep=128,
        train_fraction=0.95,
        grouped=True,
        class_weights={"roi": 16.0772, "background": 0.516},
    )
    path = tmp_path / "tiles.manifest"
    m.save(path)
    again = DatasetManifest.load(path)
    assert again == m

    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["kind"] == MANIFEST_KIND
    assert header["rng_seed"] == 7
    assert len(lines) == 1 + len(records)
    # record lines are stable serializations (sorted keys)
    assert lines[1] == json.dumps(json.loads(lines[1]), sort_keys=True)


def test_save_is_byte_deterministic(tmp_path):
    records = [make_record(tile_id=f"p1_x{i}_y0", offset_x=i * 224) for i in range(3)]
    m = DatasetManifest(records=records, rng_seed=0)
    a = tmp_path / "a.manifest"
    b = tmp_path / "b.manifest"
    m.save(a)
    m.save(b)
    assert a.read_bytes() == b.read_bytes()


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.manifest"
    path.write_text("")
    with pytest.raises(ManifestError):
        DatasetManifest.load(path)
    path.write_text('{"kind": "something-else"}\n')
    with pytest.raises(ManifestError):
        DatasetManifest.load(path)
    path.write_text('{"kind": "damageseg-manifest", "version": 1}\nnot json\n')
    with pytest.raises(ManifestError):
        DatasetManifest.load(path)


def test_replace_revalidates():
    m = DatasetManifest(records=[make_record()], rng_seed=1)
    m2 = m.replace(rng_seed=2)
    assert m2.rng_seed == 2 and m.rng_seed == 1
    with pytest.raises(ManifestError):
        m.replace(records=[make_record(), make_record()])
