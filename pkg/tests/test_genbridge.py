import sys

import numpy as np
import pytest

from damageseg.errors import GeneratorError
from damageseg.genbridge import (
    REFERENCE_PALETTE,
    BatchItem,
    GeneratorSpec,
    SyntheticBatch,
    merge_synthetic,
    reference_generate,
    run_generator,
    tile_seed,
)
from damageseg.labels import ROI, TriLabel
from damageseg.manifest import DatasetManifest, TileRecord
from damageseg.raster import Raster


def _label(classes):
    return TriLabel(np.asarray(classes, dtype=np.uint8))


def _labels(n, size=16):
    out = []
    for i in range(n):
        classes = np.zeros((size, size), dtype=np.uint8)
        classes[i % size, :] = 1
        classes[:, i % size] = 2
        out.append((f"t{i}", _label(classes)))
    return out


def _record(tile_id, split="train", provenance="real", generator_id=None):
    return TileRecord(
        tile_id=tile_id, source_photo_id=tile_id.split("_")[0],
        offset_x=0, offset_y=0, native_w=224, native_h=224,
        stored_size=224, split=split, provenance=provenance,
        generator_id=generator_id,
        image_path=f"images/{tile_id}.png", label_path=f"labels/{tile_id}.png",
    )


# --- spec validation ------------------------------------------------------

def test_spec_validation():
    GeneratorSpec(generator_id="ref")
    with pytest.raises(GeneratorError):
        GeneratorSpec(generator_id="")
    with pytest.raises(GeneratorError):
        GeneratorSpec(generator_id="x", kind="quantum")
    with pytest.raises(GeneratorError):
        GeneratorSpec(generator_id="x", kind="external")
    with pytest.raises(GeneratorError):
        GeneratorSpec(generator_id="x", kind="external", command="gen --fast")
    GeneratorSpec(generator_id="x", kind="external", command="gen {in} {out}")


def test_tile_seed_stable_and_distinct():
    assert tile_seed(7, "a_x0_y0") == tile_seed(7, "a_x0_y0")
    assert tile_seed(7, "a_x0_y0") != tile_seed(8, "a_x0_y0")
    assert tile_seed(7, "a_x0_y0") != tile_seed(7, "a_x224_y0")


# --- reference generator ---------------------------------------------------

def test_reference_amplitude_zero_is_palette_fill():
    label = _label(np.zeros((8, 8)))
    img = reference_generate(label, seed=0, noise_amplitude=0)
    assert np.all(img.pixels == 96)
    roi = _label(np.full((8, 8), 2))
    img = reference_generate(roi, seed=0, noise_amplitude=0)
    assert np.all(img.pixels == np.array([150, 75, 40], dtype=np.uint8))


def test_reference_noise_centers_on_palette():
    label = _label(np.full((224, 224), 2))
    img = reference_generate(label, seed=[3, 4], noise_amplitude=10)
    means = img.pixels.reshape(-1, 3).mean(axis=0)
    for got, want in zip(means, (150, 75, 40)):
        assert abs(got - want) <= 1.0


def test_reference_deterministic_per_seed():
    label = _label(np.full((16, 16), 1))
    a = reference_generate(label, seed=[1, 2])
    b = reference_generate(label, seed=[1, 2])
    c = reference_generate(label, seed=[1, 3])
    assert a == b
    assert a != c


def test_reference_rejects_negative_amplitude():
    with pytest.raises(GeneratorError):
        reference_generate(_label(np.zeros((2, 2))), seed=0, noise_amplitude=-1)


# --- run_generator ----------------------------------------------------------

def test_empty_input_no_invocation(tmp_path):
    # an external command that would fail loudly is never run
    spec = GeneratorSpec(generator_id="boom", kind="external",
                         command="/does/not/exist {in} {out}")
    batch = run_generator([], spec, tmp_path)
    assert len(batch) == 0
    assert not (tmp_path / "in").exists()


def test_reference_run_deterministic_bytes(tmp_path):
    spec = GeneratorSpec(generator_id="ref", seed=5)
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    batch_a = run_generator(_labels(3), spec, a_dir)
    batch_b = run_generator(_labels(3), spec, b_dir)
    assert [i.tile_id for i in batch_a.items] == ["t0", "t1", "t2"]
    for item in batch_a.items:
        pa = (a_dir / item.image_path).read_bytes()
        pb = (b_dir / item.image_path).read_bytes()
        assert pa == pb


def test_run_rejects_duplicate_ids(tmp_path):
    labels = _labels(2)
    labels.append(("t0", labels[0][1]))
    with pytest.raises(GeneratorError):
        run_generator(labels, GeneratorSpec(generator_id="ref"), tmp_path)


def test_stale_outputs_are_removed(tmp_path):
    spec = GeneratorSpec(generator_id="ref", seed=1)
    run_generator(_labels(2), spec, tmp_path)
    stale = tmp_path / "out" / "t9.png"
    stale.write_bytes(b"junk")
    # rerun over t0/t1 rewrites them; unrelated files stay
    first = (tmp_path / "out" / "t0.png").read_bytes()
    run_generator(_labels(2), spec, tmp_path)
    assert (tmp_path / "out" / "t0.png").read_bytes() == first
    assert stale.exists()
    # but a stale file for a requested id cannot satisfy validation:
    # a generator that writes nothing fails even with outputs present
    script = tmp_path / "noop.py"
    script.write_text("import sys\n")
    noop = GeneratorSpec(
        generator_id="noop", kind="external",
        command=f"{sys.executable} {script} {{in}} {{out}}",
    )
    with pytest.raises(GeneratorError) as err:
        run_generator(_labels(2), noop, tmp_path)
    assert "t0" in str(err.value) and "t1" in str(err.value)


def _external_script(tmp_path, body):
    script = tmp_path / "gen.py"
    script.write_text(body)
    return f"{sys.executable} {script} {{in}} {{out}}"


def test_external_generator_round_trip(tmp_path):
    cmd = _external_script(tmp_path, """
import os, sys
import numpy as np
from PIL import Image
in_dir, out_dir = sys.argv[1], sys.argv[2]
for name in os.listdir(in_dir):
    arr = np.asarray(Image.open(os.path.join(in_dir, name)))
    rgb = np.stack([(arr * 80).astype('uint8')] * 3, axis=-1)
    Image.fromarray(rgb, mode='RGB').save(os.path.join(out_dir, name))
""")
    spec = GeneratorSpec(generator_id="ext", kind="external", command=cmd)
    batch = run_generator(_labels(3), spec, tmp_path / "work")
    assert len(batch) == 3
    img = Raster.from_png(tmp_path / "work" / batch.items[0].image_path)
    assert img.channels == 3
    assert set(np.unique(img.pixels)) <= {0, 80, 160}


def test_external_missing_outputs_named(tmp_path):
    cmd = _external_script(tmp_path, """
import os, sys
import numpy as np
from PIL import Image
in_dir, out_dir = sys.argv[1], sys.argv[2]
names = sorted(os.listdir(in_dir))[:1]  # only the first tile
for name in names:
    arr = np.asarray(Image.open(os.path.join(in_dir, name)))
    rgb = np.zeros(arr.shape + (3,), dtype='uint8')
    Image.fromarray(rgb, mode='RGB').save(os.path.join(out_dir, name))
""")
    spec = GeneratorSpec(generator_id="ext", kind="external", command=cmd)
    with pytest.raises(GeneratorError) as err:
        run_generator(_labels(3), spec, tmp_path / "work")
    msg = str(err.value)
    assert "t1" in msg and "t2" in msg and "t0" not in msg.split(":", 1)[1]


def test_external_failure_reports_stderr_tail(tmp_path):
    cmd = _external_script(tmp_path, """
import sys
print('cuda device exploded', file=sys.stderr)
sys.exit(3)
""")
    spec = GeneratorSpec(generator_id="ext", kind="external", command=cmd)
    with pytest.raises(GeneratorError) as err:
        run_generator(_labels(1), spec, tmp_path / "work")
    assert "status 3" in str(err.value)
    assert "cuda device exploded" in str(err.value)


def test_external_wrong_shape_rejected(tmp_path):
    cmd = _external_script(tmp_path, """
import os, sys
import numpy as np
from PIL import Image
in_dir, out_dir = sys.argv[1], sys.argv[2]
for name in os.listdir(in_dir):
    Image.fromarray(np.zeros((4, 4, 3), dtype='uint8'), mode='RGB').save(
        os.path.join(out_dir, name))
""")
    spec = GeneratorSpec(generator_id="ext", kind="external", command=cmd)
    with pytest.raises(GeneratorError) as err:
        run_generator(_labels(2), spec, tmp_path / "work")
    assert "4x4" in str(err.value)


# --- batch persistence -------------------------------------------------------

def test_batch_save_load_round_trip(tmp_path):
    spec = GeneratorSpec(generator_id="ref", seed=2)
    work = tmp_path / "work"
    batch = run_generator(_labels(2), spec, work)
    path = tmp_path / "batch.json"
    batch.save(path, base=work)
    again = SyntheticBatch.load(path)
    assert again.generator_id == "ref"
    assert [i.tile_id for i in again.items] == ["t0", "t1"]
    # paths were rewritten relative to the batch file's directory
    for item in again.items:
        assert (tmp_path / item.image_path).is_file()
        assert (tmp_path / item.label_path).is_file()


# --- merge --------------------------------------------------------------------

def _manifest():
    return DatasetManifest(records=[
        _record("p1_x0_y0"),
        _record("p1_x224_y0"),
        _record("p2_x0_y0", split="test"),
    ])


def _batch(tile_ids, generator_id="ref"):
    return SyntheticBatch(
        generator_id=generator_id,
        items=tuple(
            BatchItem(tile_id=t, label_path=f"in/{t}.png",
                      image_path=f"out/{t}.png", generator_id=generator_id)
            for t in tile_ids
        ),
    )


def test_merge_doubles_train_reuses_labels():
    merged = merge_synthetic(_manifest(), _batch(["p1_x0_y0", "p1_x224_y0"]))
    assert len(merged) == 5
    rec = merged.record("p1_x0_y0__ref")
    assert rec.provenance == "synthetic"
    assert rec.split == "train"
    assert rec.generator_id == "ref"
    assert rec.label_path == "labels/p1_x0_y0.png"  # label reused
    assert rec.image_path == "out/p1_x0_y0.png"
    # untouched records survive byte-for-byte
    assert merged.record("p2_x0_y0") == _manifest().record("p2_x0_y0")


def test_merge_image_path_override():
    merged = merge_synthetic(
        _manifest(), _batch(["p1_x0_y0"]),
        image_paths={"p1_x0_y0": "gen/p1_x0_y0__ref.png"},
    )
    assert merged.record("p1_x0_y0__ref").image_path == "gen/p1_x0_y0__ref.png"


def test_merge_rejects_test_split_sources():
    with pytest.raises(GeneratorError) as err:
        merge_synthetic(_manifest(), _batch(["p2_x0_y0"]))
    assert "test" in str(err.value)


def test_merge_rejects_synthetic_sources():
    first = merge_synthetic(_manifest(), _batch(["p1_x0_y0"]))
    with pytest.raises(GeneratorError):
        merge_synthetic(first, _batch(["p1_x0_y0__ref"]))


def test_merge_twice_collides_on_ids():
    first = merge_synthetic(_manifest(), _batch(["p1_x0_y0"]))
    with pytest.raises(Exception):
        merge_synthetic(first, _batch(["p1_x0_y0"]))


def test_merge_empty_batch_is_identity():
    m = _manifest()
    assert merge_synthetic(m, SyntheticBatch(generator_id="ref", items=())) is m
